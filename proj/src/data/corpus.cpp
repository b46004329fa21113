// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/data/corpus.hpp"

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/data/dataset.hpp"
#include "sqlgrpo/sql/resolve.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>

namespace sqlgrpo::data {

namespace {

/// One phrase per language, in kLanguages order (vi es ja de en zh fr).
using Words = std::array<const char*, 7>;

/// A parent table (id, name, category, number) and a child table (id, label,
/// number, parent id), with the words each language uses for them.
struct Blueprint {
    const char* db;
    const char* parent;
    const char* child;
    const char* name_col;
    const char* cat_col;
    const char* num_col;
    const char* label_col;
    const char* cnum_col;
    const char* fk_col;
    Words parents, children, name, cat, num, label, cnum;
    std::vector<const char*> names;  // one per parent row, so names are unique
    std::vector<const char*> cats;
    int num_lo, num_step;
    std::vector<const char*> labels;
    int cnum_lo, cnum_step;
    std::vector<int> num_cuts, cnum_cuts;
};

const Words kName = {"tên", "nombre", "名前", "Namen", "name", "名字", "nom"};

const std::vector<Blueprint>& blueprints() {
    static const std::vector<Blueprint> b = {
        {"concert", "singer", "concert", "name", "country", "age", "title", "year", "singer_id",
         {"ca sĩ", "cantantes", "歌手", "Sänger", "singers", "歌手", "chanteurs"},
         {"buổi hòa nhạc", "conciertos", "コンサート", "Konzerte", "concerts", "音乐会", "concerts"},
         kName,
         {"quốc gia", "país", "国", "Land", "country", "国家", "pays"},
         {"tuổi", "edad", "年齢", "Alter", "age", "年龄", "âge"},
         {"tiêu đề", "título", "タイトル", "Titel", "title", "标题", "titre"},
         {"năm", "año", "年", "Jahr", "year", "年份", "année"},
         {"Ana", "Bruno", "Chen", "Dara", "Emil", "Farah", "Goro", "Hana"},
         {"France", "Japan", "Brazil", "Vietnam"},
         20, 5,
         {"Dawn", "Echo", "Tide", "Spark", "Bloom", "Orbit", "Pulse", "Drift", "Haze", "Glow"},
         2010, 1,
         {30, 40, 50},
         {2012, 2015, 2018}},
        {"library", "author", "book", "name", "nation", "born", "title", "pages", "author_id",
         {"tác giả", "autores", "著者", "Autoren", "authors", "作者", "auteurs"},
         {"sách", "libros", "本", "Bücher", "books", "书", "livres"},
         kName,
         {"quốc tịch", "nacionalidad", "国籍", "Nationalität", "nationality", "国籍", "nationalité"},
         {"năm sinh", "año de nacimiento", "生年", "Geburtsjahr", "birth year", "出生年份", "année de naissance"},
         {"tựa đề", "título", "題名", "Titel", "title", "书名", "titre"},
         {"số trang", "páginas", "ページ数", "Seitenzahl", "page count", "页数", "nombre de pages"},
         {"Ito", "Jones", "Kim", "Lopez", "Mori", "Novak", "Okafor", "Petit"},
         {"Chile", "Korea", "Spain", "Kenya"},
         1940, 5,
         {"Rivers", "Stones", "Maps", "Winter", "Ashes", "Harbor", "Lanterns", "Orchard", "Ink", "Salt"},
         100, 20,
         {1960, 1970, 1980},
         {200, 300, 400}},
        {"shop", "product", "sale", "name", "category", "price", "city", "qty", "product_id",
         {"sản phẩm", "productos", "商品", "Produkte", "products", "产品", "produits"},
         {"đơn bán", "ventas", "販売", "Verkäufe", "sales", "销售记录", "ventes"},
         kName,
         {"loại", "categoría", "カテゴリ", "Kategorie", "category", "类别", "catégorie"},
         {"giá", "precio", "価格", "Preis", "price", "价格", "prix"},
         {"thành phố", "ciudad", "都市", "Stadt", "city", "城市", "ville"},
         {"số lượng", "cantidad", "数量", "Menge", "quantity", "数量", "quantité"},
         {"Kettle", "Lamp", "Mug", "Chair", "Desk", "Fan", "Rug", "Clock"},
         {"kitchen", "office", "garden", "decor"},
         10, 10,
         {"Lima", "Oslo", "Pune", "Rome", "Kyiv", "Doha", "Baku", "Riga"},
         1, 1,
         {40, 60, 80},
         {3, 5, 7}},
        {"school", "teacher", "course", "name", "subject", "salary", "title", "credits", "teacher_id",
         {"giáo viên", "profesores", "教師", "Lehrer", "teachers", "教师", "enseignants"},
         {"khóa học", "cursos", "講座", "Kurse", "courses", "课程", "cours"},
         kName,
         {"môn", "asignatura", "科目", "Fach", "subject", "科目", "matière"},
         {"lương", "salario", "給与", "Gehalt", "salary", "工资", "salaire"},
         {"tựa đề", "título", "タイトル", "Titel", "title", "标题", "titre"},
         {"tín chỉ", "créditos", "単位", "Credits", "credits", "学分", "crédits"},
         {"Quinn", "Rosa", "Sato", "Tomas", "Uma", "Vera", "Wong", "Yara"},
         {"math", "art", "music", "physics"},
         3000, 250,
         {"Algebra", "Sketching", "Choir", "Optics", "Poetry", "Logic", "Mosaic", "Rhythm"},
         1, 1,
         {3500, 4000, 4500},
         {2, 3, 4}},
    };
    return b;
}

constexpr std::size_t kParentRows = 8;
constexpr std::size_t kChildRows = 16;
constexpr std::size_t kValueLevels = 9;  // numbers are lo + step * [0, 9)
/// Questions mention only the first few names, so that each recurs across
/// patterns.
constexpr std::size_t kAskedNames = 4;

enum class Pattern {
    ListNames,
    CountParents,
    NamesAbove,
    NamesBelow,
    CountInCategory,
    ParentAggregate,
    NamesByNumberDesc,
    NamesByNumberAsc,
    CountPerCategory,
    JoinLabels,
    MoreChildrenThan,
    DistinctCategories,
    TopName,
    BottomName,
    LabelsAbove,
    LabelsBelow,
    ChildrenOfName,
    ListLabels,
    CountChildren,
    ChildAggregate,
    CountAbove,
    NamesInCategory,
    MaxInCategory,
    LabelsOfName,
    NumberOfName,
};

const Words& templates(Pattern p) {
    static const std::map<Pattern, Words> t = {
        {Pattern::ListNames,
         {"liệt kê {name} của tất cả {P}", "lista el {name} de todos los {P}", "すべての{P}の{name}を一覧表示して",
          "liste den {name} aller {P} auf", "list the {name} of all {P}", "列出所有{P}的{name}",
          "liste le {name} de tous les {P}"}},
        {Pattern::CountParents,
         {"có bao nhiêu {P}?", "¿cuántos {P} hay?", "{P}はいくつありますか?", "wie viele {P} gibt es?",
          "how many {P} are there?", "有多少{P}?", "combien de {P} y a-t-il ?"}},
        {Pattern::NamesAbove,
         {"liệt kê {name} của {P} có {num} lớn hơn {N}", "muestra el {name} de los {P} con {num} mayor que {N}",
          "{num}が{N}より大きい{P}の{name}を表示して", "zeige den {name} der {P} mit {num} größer als {N}",
          "show the {name} of {P} whose {num} is greater than {N}", "显示{num}大于{N}的{P}的{name}",
          "affiche le {name} des {P} dont le {num} est supérieur à {N}"}},
        {Pattern::NamesBelow,
         {"liệt kê {name} của {P} có {num} nhỏ hơn {N}", "muestra el {name} de los {P} con {num} menor que {N}",
          "{num}が{N}より小さい{P}の{name}を表示して", "zeige den {name} der {P} mit {num} kleiner als {N}",
          "show the {name} of {P} whose {num} is less than {N}", "显示{num}小于{N}的{P}的{name}",
          "affiche le {name} des {P} dont le {num} est inférieur à {N}"}},
        {Pattern::CountInCategory,
         {"có bao nhiêu {P} có {cat} là {V}?", "¿cuántos {P} tienen {cat} {V}?", "{cat}が{V}の{P}はいくつありますか?",
          "wie viele {P} haben {cat} {V}?", "how many {P} have {cat} {V}?", "{cat}是{V}的{P}有多少?",
          "combien de {P} ont le {cat} {V} ?"}},
        {Pattern::ParentAggregate,
         {"{aggnum} của các {P} là bao nhiêu?", "¿cuál es el {aggnum} de los {P}?", "{P}の{aggnum}はいくつですか?",
          "was ist das {aggnum} der {P}?", "what is the {aggnum} of the {P}?", "{P}的{aggnum}是多少?",
          "quel est le {aggnum} des {P} ?"}},
        {Pattern::NamesByNumberDesc,
         {"liệt kê {name} của {P} theo {num} giảm dần", "lista el {name} de los {P} ordenados por {num} descendente",
          "{num}の降順で{P}の{name}を並べて", "liste den {name} der {P} nach {num} absteigend",
          "list the {name} of {P} sorted by {num} descending", "按{num}降序列出{P}的{name}",
          "liste le {name} des {P} triés par {num} décroissant"}},
        {Pattern::NamesByNumberAsc,
         {"liệt kê {name} của {P} theo {num} tăng dần", "lista el {name} de los {P} ordenados por {num} ascendente",
          "{num}の昇順で{P}の{name}を並べて", "liste den {name} der {P} nach {num} aufsteigend",
          "list the {name} of {P} sorted by {num} ascending", "按{num}升序列出{P}的{name}",
          "liste le {name} des {P} triés par {num} croissant"}},
        {Pattern::CountPerCategory,
         {"đếm số {P} theo từng {cat}", "cuenta los {P} por cada {cat}", "{cat}ごとの{P}の数を数えて",
          "zähle die {P} pro {cat}", "count the {P} for each {cat}", "统计每个{cat}的{P}数量",
          "compte les {P} pour chaque {cat}"}},
        {Pattern::JoinLabels,
         {"liệt kê {label} của {C} cùng với {name} của {P}", "lista el {label} de los {C} junto con el {name} de sus {P}",
          "{C}の{label}と{P}の{name}を一覧表示して", "liste den {label} der {C} zusammen mit dem {name} der {P}",
          "list the {label} of {C} with the {name} of their {P}", "列出{C}的{label}以及对应{P}的{name}",
          "liste le {label} des {C} avec le {name} de leurs {P}"}},
        {Pattern::MoreChildrenThan,
         {"liệt kê {name} của {P} có nhiều hơn {N} {C}", "muestra el {name} de los {P} con más de {N} {C}",
          "{C}が{N}件より多い{P}の{name}を表示して", "zeige den {name} der {P} mit mehr als {N} {C}",
          "show the {name} of {P} with more than {N} {C}", "显示拥有超过{N}个{C}的{P}的{name}",
          "affiche le {name} des {P} ayant plus de {N} {C}"}},
        {Pattern::DistinctCategories,
         {"liệt kê các {cat} khác nhau của {P}", "lista los distintos valores de {cat} de los {P}",
          "{P}の{cat}を重複なしで一覧表示して", "liste die verschiedenen Werte von {cat} der {P}",
          "list the distinct {cat} values of the {P}", "列出{P}的不同{cat}",
          "liste les différentes valeurs de {cat} des {P}"}},
        {Pattern::TopName,
         {"cho biết {name} của {P} có {num} cao nhất", "da el {name} del primero de los {P} con el {num} más alto",
          "{num}が最も高い{P}の{name}は?", "nenne den {name} der {P} mit dem höchsten {num}",
          "give the {name} of the {P} with the highest {num}", "{num}最高的{P}的{name}是什么?",
          "donne le {name} parmi les {P} avec le {num} le plus élevé"}},
        {Pattern::BottomName,
         {"cho biết {name} của {P} có {num} thấp nhất", "da el {name} del primero de los {P} con el {num} más bajo",
          "{num}が最も低い{P}の{name}は?", "nenne den {name} der {P} mit dem niedrigsten {num}",
          "give the {name} of the {P} with the lowest {num}", "{num}最低的{P}的{name}是什么?",
          "donne le {name} parmi les {P} avec le {num} le plus bas"}},
        {Pattern::LabelsAbove,
         {"liệt kê {label} của {C} có {cnum} lớn hơn {N}", "muestra el {label} de los {C} con {cnum} mayor que {N}",
          "{cnum}が{N}より大きい{C}の{label}を表示して", "zeige den {label} der {C} mit {cnum} größer als {N}",
          "show the {label} of {C} whose {cnum} is greater than {N}", "显示{cnum}大于{N}的{C}的{label}",
          "affiche le {label} des {C} dont le {cnum} est supérieur à {N}"}},
        {Pattern::LabelsBelow,
         {"liệt kê {label} của {C} có {cnum} nhỏ hơn {N}", "muestra el {label} de los {C} con {cnum} menor que {N}",
          "{cnum}が{N}より小さい{C}の{label}を表示して", "zeige den {label} der {C} mit {cnum} kleiner als {N}",
          "show the {label} of {C} whose {cnum} is less than {N}", "显示{cnum}小于{N}的{C}的{label}",
          "affiche le {label} des {C} dont le {cnum} est inférieur à {N}"}},
        {Pattern::ChildrenOfName,
         {"{X} có bao nhiêu {C}?", "¿cuántos {C} tiene {X}?", "{X}の{C}はいくつありますか?", "wie viele {C} hat {X}?",
          "how many {C} does {X} have?", "{X}有多少{C}?", "combien de {C} a {X} ?"}},
        {Pattern::ListLabels,
         {"liệt kê {label} của tất cả {C}", "lista el {label} de todos los {C}", "すべての{C}の{label}を一覧表示して",
          "liste den {label} aller {C} auf", "list the {label} of all {C}", "列出所有{C}的{label}",
          "liste le {label} de tous les {C}"}},
        {Pattern::CountChildren,
         {"có bao nhiêu {C}?", "¿cuántos {C} hay?", "{C}はいくつありますか?", "wie viele {C} gibt es?",
          "how many {C} are there?", "有多少{C}?", "combien de {C} y a-t-il ?"}},
        {Pattern::ChildAggregate,
         {"{aggcnum} của các {C} là bao nhiêu?", "¿cuál es el {aggcnum} de los {C}?", "{C}の{aggcnum}はいくつですか?",
          "was ist das {aggcnum} der {C}?", "what is the {aggcnum} of the {C}?", "{C}的{aggcnum}是多少?",
          "quel est le {aggcnum} des {C} ?"}},
        {Pattern::CountAbove,
         {"có bao nhiêu {P} có {num} lớn hơn {N}?", "¿cuántos {P} tienen {num} mayor que {N}?",
          "{num}が{N}より大きい{P}はいくつありますか?", "wie viele {P} haben {num} größer als {N}?",
          "how many {P} have {num} greater than {N}?", "{num}大于{N}的{P}有多少?",
          "combien de {P} ont un {num} supérieur à {N} ?"}},
        {Pattern::NamesInCategory,
         {"liệt kê {name} của {P} có {cat} là {V}", "muestra el {name} de los {P} con {cat} {V}",
          "{cat}が{V}の{P}の{name}を表示して", "zeige den {name} der {P} mit {cat} {V}",
          "show the {name} of {P} whose {cat} is {V}", "显示{cat}是{V}的{P}的{name}",
          "affiche le {name} des {P} dont le {cat} est {V}"}},
        {Pattern::MaxInCategory,
         {"{aggnum} của {P} có {cat} là {V} là bao nhiêu?", "¿cuál es el {aggnum} de los {P} con {cat} {V}?",
          "{cat}が{V}の{P}の{aggnum}はいくつですか?", "was ist das {aggnum} der {P} mit {cat} {V}?",
          "what is the {aggnum} of {P} whose {cat} is {V}?", "{cat}是{V}的{P}的{aggnum}是多少?",
          "quel est le {aggnum} des {P} dont le {cat} est {V} ?"}},
        {Pattern::LabelsOfName,
         {"liệt kê {label} của {C} của {X}", "lista el {label} de los {C} de {X}", "{X}の{C}の{label}を一覧表示して",
          "liste den {label} der {C} von {X} auf", "list the {label} of the {C} of {X}", "列出{X}的{C}的{label}",
          "liste le {label} des {C} de {X}"}},
        {Pattern::NumberOfName,
         {"{num} của {X} là bao nhiêu?", "¿cuál es el {num} de {X}?", "{X}の{num}はいくつですか?",
          "was ist das {num} von {X}?", "what is the {num} of {X}?", "{X}的{num}是多少?", "quel est le {num} de {X} ?"}},
    };
    return t.at(p);
}

const std::array<const char*, 3> kAggSql = {"MAX", "MIN", "AVG"};
const std::array<Words, 3> kAggWords = {{
    {"lớn nhất", "máximo", "最大", "maximale", "maximum", "最大", "maximal"},
    {"nhỏ nhất", "mínimo", "最小", "minimale", "minimum", "最小", "minimal"},
    {"trung bình", "promedio", "平均", "durchschnittliche", "average", "平均", "moyen"},
}};

/// "maximum age" in each language's word order.
std::string aggregate_phrase(std::size_t lang, std::size_t agg, const std::string& noun) {
    const std::string a = kAggWords[agg][lang];
    switch (lang) {
    case 0:  // vi
    case 1:  // es
    case 6:  // fr
        return noun + " " + a;
    case 2:  // ja
        return noun + "の" + a;
    case 5:  // zh
        return a + noun;
    default:
        return a + " " + noun;
    }
}

struct Instance {
    Pattern pattern;
    std::string n;  // numeric slot
    std::string v;  // category or name slot
    std::size_t agg = 0;
};

std::vector<Instance> instances(const Blueprint& b) {
    std::vector<Instance> out;
    for (Pattern p : {Pattern::ListNames, Pattern::CountParents, Pattern::NamesByNumberDesc, Pattern::NamesByNumberAsc,
                      Pattern::CountPerCategory, Pattern::JoinLabels, Pattern::DistinctCategories, Pattern::TopName,
                      Pattern::BottomName, Pattern::ListLabels, Pattern::CountChildren}) {
        out.push_back({p, "", "", 0});
    }
    for (int n : b.num_cuts) {
        out.push_back({Pattern::NamesAbove, std::to_string(n), "", 0});
        out.push_back({Pattern::NamesBelow, std::to_string(n), "", 0});
        out.push_back({Pattern::CountAbove, std::to_string(n), "", 0});
    }
    for (int n : b.cnum_cuts) {
        out.push_back({Pattern::LabelsAbove, std::to_string(n), "", 0});
        out.push_back({Pattern::LabelsBelow, std::to_string(n), "", 0});
    }
    for (const char* c : b.cats) {
        for (Pattern p : {Pattern::CountInCategory, Pattern::NamesInCategory, Pattern::MaxInCategory}) {
            out.push_back({p, "", c, 0});
        }
    }
    for (std::size_t i = 0; i < kAskedNames; ++i) {
        for (Pattern p : {Pattern::ChildrenOfName, Pattern::LabelsOfName, Pattern::NumberOfName}) {
            out.push_back({p, "", b.names[i], 0});
        }
    }
    for (std::size_t a = 0; a < kAggSql.size(); ++a) {
        out.push_back({Pattern::ParentAggregate, "", "", a});
        out.push_back({Pattern::ChildAggregate, "", "", a});
    }
    for (int n : {1, 2, 3}) out.push_back({Pattern::MoreChildrenThan, std::to_string(n), "", 0});
    return out;
}

std::string gold_sql(const Blueprint& b, const Instance& in) {
    const std::string P = b.parent, C = b.child;
    const std::string name = P + "." + b.name_col, cat = P + "." + b.cat_col, num = P + "." + b.num_col;
    const std::string label = C + "." + b.label_col, cnum = C + "." + b.cnum_col, fk = C + "." + b.fk_col;
    const std::string join = " JOIN " + P + " ON " + fk + " = " + P + ".id";
    switch (in.pattern) {
    case Pattern::ListNames: return "SELECT " + name + " FROM " + P;
    case Pattern::CountParents: return "SELECT COUNT(*) FROM " + P;
    case Pattern::NamesAbove: return "SELECT " + name + " FROM " + P + " WHERE " + num + " > " + in.n;
    case Pattern::NamesBelow: return "SELECT " + name + " FROM " + P + " WHERE " + num + " < " + in.n;
    case Pattern::CountInCategory: return "SELECT COUNT(*) FROM " + P + " WHERE " + cat + " = '" + in.v + "'";
    case Pattern::ParentAggregate: return std::string("SELECT ") + kAggSql[in.agg] + "(" + num + ") FROM " + P;
    case Pattern::NamesByNumberDesc: return "SELECT " + name + " FROM " + P + " ORDER BY " + num + " DESC";
    case Pattern::NamesByNumberAsc: return "SELECT " + name + " FROM " + P + " ORDER BY " + num;
    case Pattern::CountPerCategory: return "SELECT " + cat + ", COUNT(*) FROM " + P + " GROUP BY " + cat;
    case Pattern::JoinLabels: return "SELECT " + label + ", " + name + " FROM " + C + join;
    case Pattern::MoreChildrenThan:
        return "SELECT " + name + " FROM " + C + join + " GROUP BY " + name + " HAVING COUNT(*) > " + in.n;
    case Pattern::DistinctCategories: return "SELECT DISTINCT " + cat + " FROM " + P;
    case Pattern::TopName: return "SELECT " + name + " FROM " + P + " ORDER BY " + num + " DESC LIMIT 1";
    case Pattern::BottomName: return "SELECT " + name + " FROM " + P + " ORDER BY " + num + " LIMIT 1";
    case Pattern::LabelsAbove: return "SELECT " + label + " FROM " + C + " WHERE " + cnum + " > " + in.n;
    case Pattern::LabelsBelow: return "SELECT " + label + " FROM " + C + " WHERE " + cnum + " < " + in.n;
    case Pattern::ChildrenOfName:
        return "SELECT COUNT(*) FROM " + C + join + " WHERE " + name + " = '" + in.v + "'";
    case Pattern::ListLabels: return "SELECT " + label + " FROM " + C;
    case Pattern::CountChildren: return "SELECT COUNT(*) FROM " + C;
    case Pattern::ChildAggregate: return std::string("SELECT ") + kAggSql[in.agg] + "(" + cnum + ") FROM " + C;
    case Pattern::CountAbove: return "SELECT COUNT(*) FROM " + P + " WHERE " + num + " > " + in.n;
    case Pattern::NamesInCategory: return "SELECT " + name + " FROM " + P + " WHERE " + cat + " = '" + in.v + "'";
    case Pattern::MaxInCategory:
        return "SELECT MAX(" + num + ") FROM " + P + " WHERE " + cat + " = '" + in.v + "'";
    case Pattern::LabelsOfName:
        return "SELECT " + label + " FROM " + C + join + " WHERE " + name + " = '" + in.v + "'";
    case Pattern::NumberOfName: return "SELECT " + num + " FROM " + P + " WHERE " + name + " = '" + in.v + "'";
    }
    throw ValidationError("unknown question pattern");
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
}

std::string question(const Blueprint& b, const Instance& in, std::size_t lang) {
    std::string q = templates(in.pattern)[lang];
    replace_all(q, "{aggnum}", aggregate_phrase(lang, in.agg, b.num[lang]));
    replace_all(q, "{aggcnum}", aggregate_phrase(lang, in.agg, b.cnum[lang]));
    replace_all(q, "{P}", b.parents[lang]);
    replace_all(q, "{C}", b.children[lang]);
    replace_all(q, "{name}", b.name[lang]);
    replace_all(q, "{cat}", b.cat[lang]);
    replace_all(q, "{num}", b.num[lang]);
    replace_all(q, "{label}", b.label[lang]);
    replace_all(q, "{cnum}", b.cnum[lang]);
    replace_all(q, "{N}", in.n);
    replace_all(q, "{V}", in.v);
    replace_all(q, "{X}", in.v);
    return q;
}

Schema make_schema(const Blueprint& b) {
    Schema s;
    s.db_id = b.db;
    s.tables.push_back({b.parent,
                        {{"id", ColumnType::Int},
                         {b.name_col, ColumnType::Text},
                         {b.cat_col, ColumnType::Text},
                         {b.num_col, ColumnType::Int}},
                        {"id"}});
    s.tables.push_back({b.child,
                        {{"id", ColumnType::Int},
                         {b.label_col, ColumnType::Text},
                         {b.cnum_col, ColumnType::Int},
                         {b.fk_col, ColumnType::Int}},
                        {"id"}});
    s.foreign_keys.push_back({b.child, b.fk_col, b.parent, "id"});
    s.validate();
    return s;
}

DatabaseState make_state(const Blueprint& b, std::uint64_t seed) {
    Rng rng(seed);
    DatabaseState st;
    st.schema_id = b.db;
    // Distinct parent numbers keep MAX/MIN/ORDER BY answers unambiguous.
    std::vector<std::int64_t> levels(kValueLevels);
    for (std::size_t i = 0; i < kValueLevels; ++i) levels[i] = static_cast<std::int64_t>(i);
    rng.shuffle(levels.begin(), levels.end());
    auto& parents = st.rows[b.parent];
    for (std::size_t i = 0; i < kParentRows; ++i) {
        parents.push_back({Value::integer(static_cast<std::int64_t>(i + 1)), Value::text(b.names[i]),
                           Value::text(b.cats[rng.index(b.cats.size())]),
                           Value::integer(b.num_lo + b.num_step * levels[i])});
    }
    auto& children = st.rows[b.child];
    for (std::size_t i = 0; i < kChildRows; ++i) {
        children.push_back(
            {Value::integer(static_cast<std::int64_t>(i + 1)), Value::text(b.labels[rng.index(b.labels.size())]),
             Value::integer(b.cnum_lo + b.cnum_step * static_cast<std::int64_t>(rng.index(kValueLevels))),
             Value::integer(static_cast<std::int64_t>(1 + rng.index(kParentRows)))});
    }
    return st;
}

/// The reusable parts of an instance: its pattern and each slot value.
std::vector<std::string> parts(const Instance& in) {
    std::vector<std::string> k = {"p" + std::to_string(static_cast<int>(in.pattern))};
    const bool child_num = in.pattern == Pattern::LabelsAbove || in.pattern == Pattern::LabelsBelow;
    const bool having = in.pattern == Pattern::MoreChildrenThan;
    if (!in.n.empty()) k.push_back((child_num ? "c:" : having ? "h:" : "n:") + in.n);
    if (!in.v.empty()) k.push_back("v:" + in.v);
    if (in.pattern == Pattern::ParentAggregate || in.pattern == Pattern::ChildAggregate) {
        k.push_back("a:" + std::to_string(in.agg));
    }
    return k;
}

/// Marks about a sixth of the questions as dev, in order, taking a question
/// only while each of its parts still occurs in some train question, so dev
/// questions are new combinations of seen parts.
std::vector<bool> dev_split(const std::vector<Instance>& chosen) {
    std::map<std::string, std::size_t> uses;
    for (const auto& in : chosen) {
        for (const auto& k : parts(in)) ++uses[k];
    }
    std::vector<bool> dev(chosen.size(), false);
    std::size_t left = chosen.size() / 6;
    for (std::size_t i = 0; i < chosen.size() && left > 0; ++i) {
        const auto k = parts(chosen[i]);
        if (std::all_of(k.begin(), k.end(), [&](const std::string& x) { return uses[x] >= 2; })) {
            for (const auto& x : k) --uses[x];
            dev[i] = true;
            --left;
        }
    }
    return dev;
}

std::string example_id(const Blueprint& b, std::size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu", k + 1);
    return std::string(b.db) + "-" + buf;
}

} // namespace

std::size_t corpus_schema_count() { return blueprints().size(); }

std::size_t corpus_question_capacity() {
    std::size_t cap = SIZE_MAX;
    for (const auto& b : blueprints()) cap = std::min(cap, instances(b).size());
    return cap;
}

Corpus generate_corpus(const CorpusOptions& options) {
    if (options.schemas == 0 || options.questions_per_schema == 0) {
        throw ValidationError("mkdata needs at least one schema and one question per schema");
    }
    if (options.schemas > corpus_schema_count()) {
        throw ValidationError("at most " + std::to_string(corpus_schema_count()) + " schemas are bundled");
    }
    if (options.questions_per_schema > corpus_question_capacity()) {
        throw ValidationError("at most " + std::to_string(corpus_question_capacity()) + " questions per schema");
    }
    Corpus c;
    for (std::size_t s = 0; s < options.schemas; ++s) {
        const Blueprint& b = blueprints()[s];
        c.schemas.push_back(make_schema(b));
        c.states.push_back(make_state(b, mix_seed(options.seed, 2 * s)));
        std::vector<Instance> pool = instances(b);
        Rng rng(mix_seed(options.seed, 2 * s + 1));
        rng.shuffle(pool.begin(), pool.end());
        pool.resize(options.questions_per_schema);
        const std::vector<bool> dev = dev_split(pool);
        for (std::size_t k = 0; k < pool.size(); ++k) {
            const std::string gold = sql::canonical_sql(gold_sql(b, pool[k]), c.schemas.back());
            auto& split = dev[k] ? c.dev : c.train;
            for (std::size_t lang = 0; lang < kLanguages.size(); ++lang) {
                split.push_back({example_id(b, k), b.db, std::string(kLanguages[lang]), question(b, pool[k], lang), gold});
            }
        }
    }
    return c;
}

void write_corpus(const Corpus& corpus, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t s = 0; s < corpus.schemas.size(); ++s) {
        const std::string base = dir + "/" + corpus.schemas[s].db_id;
        save_schema(corpus.schemas[s], base + ".schema.json");
        save_state(corpus.states[s], base + ".state.json");
    }
    write_jsonl(corpus.train, dir + "/train.jsonl");
    write_jsonl(corpus.dev, dir + "/dev.jsonl");
}

} // namespace sqlgrpo::data
