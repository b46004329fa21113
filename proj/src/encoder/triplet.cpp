// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/encoder/triplet.hpp"

#include "sqlgrpo/ad/ops.hpp"
#include "sqlgrpo/ad/optim.hpp"
#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/common/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sqlgrpo::encoder {

namespace {

std::vector<std::u32string> sorted_trigrams(std::string_view s) {
    const auto cps = decode_utf8(to_lower(s));
    std::vector<std::u32string> out;
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
        out.emplace_back(cps.begin() + static_cast<long>(i), cps.begin() + static_cast<long>(i + 3));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t intersection_size(const std::vector<std::u32string>& a, const std::vector<std::u32string>& b) {
    std::size_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

} // namespace

std::size_t trigram_overlap(std::string_view a, std::string_view b) {
    return intersection_size(sorted_trigrams(a), sorted_trigrams(b));
}

std::vector<Triple> mine_triples(const std::vector<Example>& data, std::uint64_t seed, const MiningOptions& options) {
    std::map<std::string, std::vector<std::size_t>> by_sql;
    for (std::size_t i = 0; i < data.size(); ++i) {
        by_sql[data[i].gold_sql].push_back(i);
    }
    if (by_sql.size() < 2) {
        throw ValidationError("triple mining needs at least two distinct gold SQL queries, found " +
                              std::to_string(by_sql.size()));
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j : by_sql[data[i].gold_sql]) {
            if (j <= i || data[i].lang == data[j].lang) {
                continue;
            }
            if (options.pair_languages == PairLanguages::All) {
                pairs.emplace_back(i, j);
            } else if (data[i].lang == "en") {
                pairs.emplace_back(j, i);
            } else if (data[j].lang == "en") {
                pairs.emplace_back(i, j);
            }
        }
    }
    if (pairs.empty()) {
        throw ValidationError("triple mining found no cross-language positive pairs");
    }

    std::vector<std::vector<std::u32string>> grams;
    grams.reserve(data.size());
    for (const auto& e : data) {
        grams.push_back(sorted_trigrams(e.question));
    }
    Rng rng(seed);
    auto negative_for = [&](std::size_t anchor) {
        const Example& a = data[anchor];
        if (rng.bernoulli(options.hard_fraction)) {
            std::size_t best = data.size();
            std::size_t best_overlap = 0;
            for (std::size_t k = 0; k < data.size(); ++k) {
                if (data[k].db_id != a.db_id || data[k].gold_sql == a.gold_sql) {
                    continue;
                }
                const std::size_t o = intersection_size(grams[anchor], grams[k]);
                if (best == data.size() || o > best_overlap) {
                    best = k;
                    best_overlap = o;
                }
            }
            if (best != data.size()) {
                return best;
            }
        }
        while (true) {
            const std::size_t k = rng.index(data.size());
            if (data[k].gold_sql != a.gold_sql) {
                return k;
            }
        }
    };

    std::vector<Triple> triples;
    for (const auto& [a, p] : pairs) {
        const std::size_t n = negative_for(a);
        triples.push_back({data[a].question, data[p].question, data[n].question});
    }
    if (options.sql_positives) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            const std::size_t n = negative_for(i);
            triples.push_back({data[i].question, data[i].gold_sql, data[n].gold_sql});
        }
    }
    return triples;
}

double triplet_loss_from_distances(double d_ap, double d_an, double margin) {
    return std::max(0.0, d_ap - d_an + margin);
}

double triplet_loss(const std::vector<double>& a, const std::vector<double>& p, const std::vector<double>& n,
                    double margin) {
    return triplet_loss_from_distances(1.0 - cosine(a, p), 1.0 - cosine(a, n), margin);
}

TripletMetrics evaluate_triples(const Encoder& enc, const std::vector<Triple>& triples, double margin) {
    TripletMetrics m;
    std::map<std::string, std::vector<double>> cache;
    auto emb = [&](const std::string& s) -> const std::vector<double>& {
        auto it = cache.find(s);
        if (it == cache.end()) {
            it = cache.emplace(s, enc.embed(s)).first;
        }
        return it->second;
    };
    for (const auto& t : triples) {
        const auto& a = emb(t.anchor);
        const double cp = cosine(a, emb(t.positive));
        const double cn = cosine(a, emb(t.negative));
        m.loss += triplet_loss_from_distances(1.0 - cp, 1.0 - cn, margin);
        m.margin_satisfaction += ((1.0 - cn) - (1.0 - cp) >= margin) ? 1.0 : 0.0;
        m.pos_cosine += cp;
        m.neg_cosine += cn;
    }
    m.count = triples.size();
    if (m.count > 0) {
        const double n = static_cast<double>(m.count);
        m.loss /= n;
        m.margin_satisfaction /= n;
        m.pos_cosine /= n;
        m.neg_cosine /= n;
    }
    return m;
}

std::vector<EpochLog> train_encoder(Encoder& enc, const std::vector<Triple>& train, const std::vector<Triple>& heldout,
                                    const EncoderTrainConfig& config) {
    if (train.empty() || config.batch_size == 0) {
        throw ValidationError("encoder training needs at least one triple and a positive batch size");
    }
    std::vector<EpochLog> log;
    const TripletMetrics initial_train = evaluate_triples(enc, train, config.margin);
    log.push_back({0, initial_train.loss, evaluate_triples(enc, heldout, config.margin)});

    auto params = enc.parameters();
    ad::AdamWOptions opts;
    opts.weight_decay = config.weight_decay;
    ad::AdamW opt(params, opts);
    Rng rng(config.seed);
    std::vector<std::size_t> order(train.size());
    std::int64_t step = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order.begin(), order.end());
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            ad::Tensor total;
            for (std::size_t b = start; b < end; ++b) {
                const Triple& t = train[order[b]];
                const std::uint64_t base = mix_seed(config.seed, static_cast<std::uint64_t>(step) * 1024 + (b - start));
                const ad::Tensor a = enc.forward(t.anchor, true, mix_seed(base, 0));
                const ad::Tensor p = enc.forward(t.positive, true, mix_seed(base, 1));
                const ad::Tensor n = enc.forward(t.negative, true, mix_seed(base, 2));
                // d(a,p) - d(a,n) = cos(a,n) - cos(a,p)
                const ad::Tensor gap = ad::sub(ad::cosine_similarity(a, n), ad::cosine_similarity(a, p));
                const ad::Tensor l = ad::relu(ad::add(gap, ad::Tensor::scalar(config.margin)));
                total = total.defined() ? ad::add(total, l) : l;
            }
            const ad::Tensor loss = ad::scale(total, 1.0 / static_cast<double>(end - start));
            if (!std::isfinite(loss.item())) {
                throw DivergenceError("non-finite triplet loss at step " + std::to_string(step) + " (epoch " +
                                      std::to_string(epoch) + ", first anchor: " + train[order[start]].anchor + ")");
            }
            epoch_loss += loss.item() * static_cast<double>(end - start);
            opt.zero_grad();
            ad::backward(loss);
            opt.step(ad::lr_schedule(step, config.lr, config.warmup_steps));
            ++step;
        }
        log.push_back({epoch, epoch_loss / static_cast<double>(train.size()),
                       evaluate_triples(enc, heldout, config.margin)});
    }
    return log;
}

} // namespace sqlgrpo::encoder
