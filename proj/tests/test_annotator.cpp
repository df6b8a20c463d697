#include <doctest.h>

#include <json.hpp>

#include "ontosearch/annotator.hpp"
#include "ontosearch/errors.hpp"
#include "ontosearch/lstm_crf.hpp"
#include "ontosearch/nn.hpp"
#include "ontosearch/ontology.hpp"
#include "ontosearch/text.hpp"

using namespace ontosearch;

namespace {

Concept make(std::string id, ConceptKind kind, std::string name,
             std::optional<std::string> subclass = {},
             std::set<std::string> synonyms = {},
             std::optional<std::string> parent = {}) {
    Concept c;
    c.id = std::move(id);
    c.kind = kind;
    c.name = normalize_phrase(name);
    for (const auto& s : synonyms) c.synonyms.insert(normalize_phrase(s));
    c.parent = std::move(parent);
    c.attribute_subclass = std::move(subclass);
    return c;
}

Ontology shop() {
    Ontology o;
    auto put = [&](Concept c) { o.concepts[c.id] = std::move(c); };
    put(make("wallet", ConceptKind::Product, "wallet"));
    put(make("tv", ConceptKind::Product, "tv", {}, {"flatscreen"}));
    put(make("stool", ConceptKind::Product, "stool"));
    put(make("barstool", ConceptKind::Product, "bar stool", {}, {"barstool"}, "stool"));
    put(make("tissues", ConceptKind::Product, "tissues"));
    put(make("cotton-swabs", ConceptKind::Product, "cotton swabs"));
    put(make("men", ConceptKind::Attribute, "men's", "gender"));
    put(make("black", ConceptKind::Attribute, "black", "color"));
    put(make("white", ConceptKind::Attribute, "white", "color"));
    put(make("leather", ConceptKind::Attribute, "leather", "material"));
    put(make("kleenex", ConceptKind::Brand, "kleenex"));
    put(make("q-tips", ConceptKind::Brand, "q tips", {}, {"qtips"}));
    put(make("acme", ConceptKind::Brand, "acme"));
    o.default_product["kleenex"] = "tissues";
    o.default_product["q-tips"] = "cotton-swabs";
    o.rebuild_index();
    REQUIRE(validate(o).empty());
    return o;
}

} // namespace

TEST_CASE("lexicon annotation labels every token") {
    Ontology o = shop();
    QueryAnnotation a = annotate("men's black leather wallet", o);

    CHECK(a.query == "men's black leather wallet");
    REQUIRE(a.tokens.size() == 4);
    CHECK(a.tokens[0].text == "men");
    CHECK(a.tokens[0].label == TokenLabel::Attribute);
    CHECK(a.tokens[0].concept_id == "men");
    CHECK(a.tokens[0].subclass == "gender");
    CHECK(a.tokens[1].concept_id == "black");
    CHECK(a.tokens[1].subclass == "color");
    CHECK(a.tokens[2].concept_id == "leather");
    CHECK(a.tokens[2].subclass == "material");
    CHECK(a.tokens[3].label == TokenLabel::Product);
    CHECK(a.tokens[3].concept_id == "wallet");

    CHECK(a.product_ids == std::vector<std::string>{"wallet"});
    CHECK(a.attribute_ids == std::vector<std::string>{"men", "black", "leather"});
    CHECK(a.brand_ids.empty());
    CHECK(a.numeric_values.empty());
    CHECK_FALSE(a.fallback);
}

TEST_CASE("numeric pattern annotates magnitude and canonical units") {
    Ontology o = shop();
    QueryAnnotation a = annotate("45 inch tv", o);

    REQUIRE(a.tokens.size() == 3);
    CHECK(a.tokens[0].label == TokenLabel::NumericAttr);
    CHECK(a.tokens[1].label == TokenLabel::NumericAttr);
    CHECK(a.tokens[2].label == TokenLabel::Product);
    REQUIRE(a.numeric_values.size() == 1);
    CHECK(a.numeric_values[0].magnitude == 45.0);
    CHECK(a.numeric_values[0].unit == "inch");
    CHECK(a.numeric_values[0].canonical_magnitude == doctest::Approx(114.3).epsilon(1e-9));
    CHECK(a.product_ids == std::vector<std::string>{"tv"});
    CHECK_FALSE(a.fallback);
}

TEST_CASE("unknown queries stay unannotated and fall back") {
    Ontology o = shop();
    QueryAnnotation a = annotate("zzz qqq", o);
    REQUIRE(a.tokens.size() == 2);
    for (const auto& t : a.tokens) {
        CHECK(t.label == TokenLabel::Other);
        CHECK_FALSE(t.concept_id.has_value());
    }
    CHECK(a.product_ids.empty());
    CHECK(a.fallback);
}

TEST_CASE("longest lexicon match wins") {
    Ontology o = shop();
    QueryAnnotation a = annotate("white bar stool", o);
    REQUIRE(a.tokens.size() == 3);
    CHECK(a.tokens[0].concept_id == "white");
    CHECK(a.tokens[1].concept_id == "barstool");
    CHECK(a.tokens[2].concept_id == "barstool");
    CHECK(a.product_ids == std::vector<std::string>{"barstool"});

    // Synonym hits resolve to the same concept.
    QueryAnnotation b = annotate("barstool", o);
    CHECK(b.product_ids == std::vector<std::string>{"barstool"});

    // The plain head alone resolves to the parent product, not the compound.
    QueryAnnotation c = annotate("stool", o);
    CHECK(c.product_ids == std::vector<std::string>{"stool"});
}

TEST_CASE("duplicate concepts are recorded once in resolution order") {
    Ontology o = shop();
    QueryAnnotation a = annotate("black wallet black", o);
    CHECK(a.attribute_ids == std::vector<std::string>{"black"});
    CHECK(a.product_ids == std::vector<std::string>{"wallet"});
}

TEST_CASE("numeric parsing fixtures") {
    Ontology o = shop(); // units: inch=2.54, cm=1
    const auto& units = o.units;

    auto one = [&](const std::string& q) {
        auto vals = parse_numeric(normalize_query(q), units);
        REQUIRE(vals.size() == 1);
        return vals[0];
    };

    NumericValue v = one("45 inch");
    CHECK(v.magnitude == 45.0);
    CHECK(v.canonical_magnitude == doctest::Approx(114.3).epsilon(1e-9));

    CHECK(one("10 cm").canonical_magnitude == doctest::Approx(10.0));
    CHECK(one("4.5 cm").magnitude == 4.5);
    CHECK(one("45inch").magnitude == 45.0);
    CHECK(one("45inch").unit == "inch");
    // Unit words normalize before lookup: "inches" stems to "inch".
    CHECK(one("45 inches").unit == "inch");

    CHECK(parse_numeric(normalize_query("45 zorks"), units).empty());
    CHECK(parse_numeric(normalize_query("tall stool"), units).empty());
    CHECK(parse_numeric({}, units).empty());

    std::map<std::string, double> custom = {{"in", 2.54}, {"cm", 1.0}};
    auto in45 = parse_numeric({"45in"}, custom);
    REQUIRE(in45.size() == 1);
    CHECK(in45[0].unit == "in");
    CHECK(in45[0].canonical_magnitude == doctest::Approx(114.3).epsilon(1e-9));
    CHECK(parse_numeric({"45in"}, units).empty()); // unknown unit in the default table

    // Unit conversion round-trips through the canonical unit.
    double cm = one("1 inch").canonical_magnitude;
    CHECK(cm / 2.54 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("numeric matches report positions and spans") {
    Ontology o = shop();
    auto spaced = numeric_matches({"tv", "45", "inch"}, o.units);
    REQUIRE(spaced.size() == 1);
    CHECK(spaced[0].first == 1);
    CHECK(spaced[0].count == 2);

    auto attached = numeric_matches({"tv", "45inch"}, o.units);
    REQUIRE(attached.size() == 1);
    CHECK(attached[0].first == 1);
    CHECK(attached[0].count == 1);

    // Two patterns in one query.
    auto both = numeric_matches({"45", "inch", "10cm"}, o.units);
    REQUIRE(both.size() == 2);
    CHECK(both[0].first == 0);
    CHECK(both[0].count == 2);
    CHECK(both[1].first == 2);
    CHECK(both[1].count == 1);

    // A bare number with no unit is not a pattern.
    CHECK(numeric_matches({"45", "tv"}, o.units).empty());
}

namespace {

// Tiny tagger trained to tag "bar stool" and "glorp zmix" spans.
LstmCrfTagger span_model() {
    std::vector<std::string> vocab = {"white", "metal", "bar",     "stool",
                                      "glorp", "zmix",  "kitchen", "for"};
    EmbeddingTable table;
    table.dim = 8;
    nn::Rng rng(11);
    for (const auto& w : vocab) {
        nn::Vector v(8);
        for (int i = 0; i < 8; i++) v(i) = rng.uniform(-1.0, 1.0);
        table.vectors[w] = v;
    }

    std::vector<IobSequence> data = {
        {{"white", "bar", "stool"}, {kTagO, kTagB, kTagI}, ""},
        {{"metal", "bar", "stool"}, {kTagO, kTagB, kTagI}, ""},
        {{"bar", "stool", "for", "kitchen"}, {kTagB, kTagI, kTagO, kTagO}, ""},
        {{"glorp", "zmix"}, {kTagB, kTagI}, ""},
        {{"white", "glorp", "zmix"}, {kTagO, kTagB, kTagI}, ""},
        {{"metal", "glorp", "zmix"}, {kTagO, kTagB, kTagI}, ""},
    };
    LstmCrfConfig config;
    config.dim = 8;
    config.hidden = 8;
    config.epochs = 150;
    config.lr = 0.02;
    config.seed = 5;
    auto result = train_lstm_crf(data, table, config);
    REQUIRE(result.final_loss < 0.2);
    return std::move(result.model);
}

Ontology gap_shop() {
    // No standalone "stool" product: the lexicon cannot resolve the product
    // in "white bar stool" because "white bar" shadows the split.
    Ontology o;
    auto put = [&](Concept c) { o.concepts[c.id] = std::move(c); };
    put(make("barstool", ConceptKind::Product, "bar stool"));
    put(make("white-bar", ConceptKind::Attribute, "white bar", "color"));
    put(make("white", ConceptKind::Attribute, "white", "color"));
    put(make("metal", ConceptKind::Attribute, "metal", "material"));
    o.rebuild_index();
    REQUIRE(validate(o).empty());
    return o;
}

} // namespace

TEST_CASE("model fills product gaps the lexicon left open") {
    Ontology o = gap_shop();
    LstmCrfTagger model = span_model();

    // Without the model the query has no product at all.
    QueryAnnotation plain = annotate("white bar stool", o);
    CHECK(plain.product_ids.empty());
    CHECK(plain.tokens[0].concept_id == "white-bar"); // longest match took "white bar"
    CHECK(plain.tokens[1].concept_id == "white-bar");
    CHECK(plain.tokens[2].label == TokenLabel::Other);
    CHECK(plain.fallback);

    // The tagger recovers the "bar stool" span; the ontology resolves it.
    QueryAnnotation a = annotate("white bar stool", o, &model);
    CHECK(a.product_ids == std::vector<std::string>{"barstool"});
    CHECK_FALSE(a.fallback);
    CHECK(a.unresolved_products.empty());
    // Lexicon labels are never overwritten; only the gap token moves.
    CHECK(a.tokens[0].concept_id == "white-bar");
    CHECK(a.tokens[1].concept_id == "white-bar");
    CHECK(a.tokens[1].label == TokenLabel::Attribute);
    CHECK(a.tokens[2].label == TokenLabel::Product);
    CHECK(a.tokens[2].concept_id == "barstool");
}

TEST_CASE("model spans missing from the ontology are reported unresolved") {
    Ontology o = gap_shop();
    LstmCrfTagger model = span_model();

    QueryAnnotation a = annotate("metal glorp zmix", o, &model);
    CHECK(a.product_ids.empty());
    CHECK(a.fallback);
    CHECK(a.unresolved_products == std::vector<std::string>{"glorp zmix"});
    CHECK(a.tokens[0].label == TokenLabel::Attribute);
    CHECK(a.tokens[1].label == TokenLabel::Product);
    CHECK_FALSE(a.tokens[1].concept_id.has_value());
    CHECK(a.tokens[2].label == TokenLabel::Product);
    CHECK_FALSE(a.tokens[2].concept_id.has_value());
}

TEST_CASE("model is not consulted when the lexicon already found a product") {
    Ontology o = shop();
    LstmCrfTagger model = span_model();
    QueryAnnotation with = annotate("white bar stool", o, &model);
    QueryAnnotation without = annotate("white bar stool", o);
    CHECK(with == without);
    CHECK(with.product_ids == std::vector<std::string>{"barstool"});
}

TEST_CASE("default product slot fills brand-only queries") {
    Ontology o = shop();

    QueryAnnotation a = apply_default_product(annotate("kleenex", o), o);
    CHECK(a.product_ids == std::vector<std::string>{"tissues"});
    CHECK_FALSE(a.fallback);
    CHECK(a.brand_ids == std::vector<std::string>{"kleenex"});

    QueryAnnotation b = apply_default_product(annotate("qtips", o), o);
    CHECK(b.product_ids == std::vector<std::string>{"cotton-swabs"});

    // First brand with a slot wins; brands without one are skipped.
    QueryAnnotation c = apply_default_product(annotate("acme kleenex", o), o);
    CHECK(c.product_ids == std::vector<std::string>{"tissues"});

    // No-op when a product is already present or no brand has a slot.
    QueryAnnotation d = apply_default_product(annotate("kleenex wallet", o), o);
    CHECK(d.product_ids == std::vector<std::string>{"wallet"});
    QueryAnnotation e = apply_default_product(annotate("acme", o), o);
    CHECK(e.product_ids.empty());
    CHECK(e.fallback);
}

TEST_CASE("annotation json has the documented shape") {
    Ontology o = shop();
    std::string text = annotation_to_json(annotate("45 inch tv", o));
    auto j = nlohmann::json::parse(text);

    CHECK(j["query"] == "45 inch tv");
    REQUIRE(j["tokens"].size() == 3);
    CHECK(j["tokens"][0]["text"] == "45");
    CHECK(j["tokens"][0]["label"] == "NumericAttr");
    CHECK(j["tokens"][0]["concept"].is_null());
    CHECK(j["tokens"][2]["label"] == "Product");
    CHECK(j["tokens"][2]["concept"] == "tv");
    REQUIRE(j["numeric"].size() == 1);
    CHECK(j["numeric"][0]["magnitude"] == 45.0);
    CHECK(j["numeric"][0]["unit"] == "inch");
    CHECK(j["fallback"] == false);

    auto k = nlohmann::json::parse(annotation_to_json(annotate("zzz", o)));
    CHECK(k["fallback"] == true);
    CHECK(k["tokens"][0]["label"] == "Other");
    CHECK(k["tokens"][0]["concept"].is_null());
}

TEST_CASE("annotation is deterministic") {
    Ontology o = shop();
    CHECK(annotate("men's black leather wallet", o) == annotate("men's black leather wallet", o));
    CHECK(annotation_to_json(annotate("45 inch tv", o)) ==
          annotation_to_json(annotate("45 inch tv", o)));
}

TEST_CASE("product_ids nonempty exactly when fallback is false") {
    Ontology o = shop();
    for (const std::string q : {"wallet", "zzz", "kleenex", "white bar stool",
                                "45 inch tv", "black white", "stool stool"}) {
        QueryAnnotation a = annotate(q, o);
        CHECK(a.fallback == a.product_ids.empty());
    }
}
