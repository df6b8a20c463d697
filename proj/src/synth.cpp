#include "ontosearch/synth.hpp"

#include <array>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ontosearch/errors.hpp"
#include "ontosearch/io.hpp"
#include "ontosearch/nn.hpp"
#include "ontosearch/text.hpp"

using json = nlohmann::json;

namespace ontosearch {

std::string SynthProduct::phrase() const { return join_tokens(words); }

GeneratorConfig generator_config_from_json(const std::string& text) {
    GeneratorConfig c;
    try {
        json j = json::parse(text);
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("products")) c.products = j["products"].get<int>();
        if (j.contains("attributes")) c.attributes = j["attributes"].get<int>();
        if (j.contains("brands")) c.brands = j["brands"].get<int>();
        if (j.contains("categories")) c.categories = j["categories"].get<int>();
        if (j.contains("queries")) c.queries = j["queries"].get<int>();
        if (j.contains("skus_per_product"))
            c.skus_per_product = j["skus_per_product"].get<int>();
        if (j.contains("product_final_prob"))
            c.product_final_prob = j["product_final_prob"].get<double>();
        if (j.contains("preposition_tail_prob"))
            c.preposition_tail_prob = j["preposition_tail_prob"].get<double>();
        if (j.contains("noise_rate")) c.noise_rate = j["noise_rate"].get<double>();
        if (j.contains("test_categories"))
            c.test_categories = j["test_categories"].get<int>();
        if (j.contains("embedding_dim"))
            c.embedding_dim = j["embedding_dim"].get<int>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("generator config: ") + e.what());
    }
    return c;
}

std::string generator_config_to_json(const GeneratorConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["products"] = c.products;
    j["attributes"] = c.attributes;
    j["brands"] = c.brands;
    j["categories"] = c.categories;
    j["queries"] = c.queries;
    j["skus_per_product"] = c.skus_per_product;
    j["product_final_prob"] = c.product_final_prob;
    j["preposition_tail_prob"] = c.preposition_tail_prob;
    j["noise_rate"] = c.noise_rate;
    j["test_categories"] = c.test_categories;
    j["embedding_dim"] = c.embedding_dim;
    return j.dump(2) + "\n";
}

GeneratorConfig load_generator_config(const std::string& path) {
    return generator_config_from_json(read_file(path));
}

namespace {

constexpr const char* kConsonants = "bdfgklmnprtz"; // no s: keeps plurals out
constexpr const char* kVowels = "aeiou";
constexpr int kNumTails = 8;
constexpr int kNumJunk = 4;

// Word roles drive POS rows and embedding prototypes. Real embeddings
// cluster words by distributional role; the prototypes mimic that so the
// sequence tagger can generalize to product words it never saw in training.
enum Role { kRoleHead = 0, kRoleModifier, kRoleAttr, kRoleBrand, kRolePrep, kRoleTail, kRoleJunk, kNumRoles };

std::string make_syllable(nn::Rng& rng) {
    std::string s;
    s += kConsonants[rng.uniform_int(0, 11)];
    s += kVowels[rng.uniform_int(0, 4)];
    s += kConsonants[rng.uniform_int(0, 11)];
    return s;
}

// Invented word that survives normalization and stemming unchanged, so the
// emitted files round-trip through every loader without drift.
std::string fresh_word(nn::Rng& rng, std::set<std::string>& used) {
    for (int attempt = 0; attempt < 100000; attempt++) {
        std::string candidate = make_syllable(rng);
        if (rng.uniform_int(0, 1) == 1) candidate += make_syllable(rng);
        std::string w = normalize_and_stem(candidate);
        if (w.size() < 3 || normalize_and_stem(w) != w) continue;
        if (used.count(w)) continue;
        used.insert(w);
        return w;
    }
    throw DomainError("synth: vocabulary exhausted");
}

void check_config(const GeneratorConfig& c) {
    std::vector<std::string> bad;
    if (c.products < 1) bad.push_back("products must be >= 1");
    if (c.attributes < 4) bad.push_back("attributes must be >= 4");
    if (c.brands < 1) bad.push_back("brands must be >= 1");
    if (c.categories < 1) bad.push_back("categories must be >= 1");
    if (c.products < c.categories)
        bad.push_back("products must be >= categories");
    if (c.queries < 0) bad.push_back("queries must be >= 0");
    if (c.skus_per_product < 1) bad.push_back("skus_per_product must be >= 1");
    if (c.product_final_prob < 0 || c.product_final_prob > 1)
        bad.push_back("product_final_prob must be in [0, 1]");
    if (c.preposition_tail_prob < 0 || c.preposition_tail_prob > 1)
        bad.push_back("preposition_tail_prob must be in [0, 1]");
    if (c.noise_rate < 0 || c.noise_rate > 1)
        bad.push_back("noise_rate must be in [0, 1]");
    if (c.test_categories < 0 || c.test_categories >= c.categories)
        bad.push_back("test_categories must leave at least one training category");
    if (c.embedding_dim < 1) bad.push_back("embedding_dim must be >= 1");
    if (!bad.empty()) {
        std::string msg = "synth config invalid:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw DomainError(msg);
    }
}

std::array<double, kPosTags> pos_row(Role role, nn::Rng& rng) {
    // Tag indices: NOUN 0, ADJ 2, ADP 6, X 11.
    std::array<double, kPosTags> row{};
    double u = rng.uniform();
    double a = 0, rest = 0;
    switch (role) {
    case kRoleHead:
        a = 0.70 + 0.25 * u;
        rest = 1.0 - a;
        row[0] = a;
        row[2] = 0.6 * rest;
        row[11] = rest - row[2];
        break;
    case kRoleModifier:
        a = 0.45 + 0.20 * u;
        rest = 1.0 - a;
        row[0] = a;
        row[2] = 0.7 * rest;
        row[11] = rest - row[2];
        break;
    case kRoleAttr:
        a = 0.60 + 0.30 * u;
        rest = 1.0 - a;
        row[2] = a;
        row[0] = 0.5 * rest;
        row[11] = rest - row[0];
        break;
    case kRoleBrand:
        a = 0.50 + 0.20 * u;
        row[0] = a;
        row[11] = 1.0 - a;
        break;
    case kRolePrep:
        row[6] = 1.0;
        break;
    case kRoleTail:
        a = 0.55 + 0.20 * u;
        row[0] = a;
        row[11] = 1.0 - a;
        break;
    case kRoleJunk:
    default:
        row[11] = 1.0;
        break;
    }
    return row;
}

nn::Vector role_embedding(const nn::Matrix& prototypes, Role role, nn::Rng& rng) {
    int dim = static_cast<int>(prototypes.rows());
    nn::Vector v(dim);
    for (int i = 0; i < dim; i++)
        v(i) = 0.75 * prototypes(i, role) + 0.5 * rng.uniform(-1.0, 1.0);
    return v;
}

} // namespace

SynthData generate(const GeneratorConfig& config) {
    check_config(config);

    SynthData data;
    data.config = config;
    nn::Rng rng(config.seed);

    const std::vector<std::string> preps = {"for", "with", "in", "on"};
    std::set<std::string> used;
    for (const auto& p : preps) used.insert(normalize_and_stem(p));

    // Vocabulary, in fixed draw order.
    std::vector<std::string> attrs, brands, tails, junk;
    for (int i = 0; i < config.attributes; i++) attrs.push_back(fresh_word(rng, used));
    for (int i = 0; i < config.brands; i++) brands.push_back(fresh_word(rng, used));
    for (int i = 0; i < kNumTails; i++) tails.push_back(fresh_word(rng, used));
    for (int i = 0; i < kNumJunk; i++) junk.push_back(fresh_word(rng, used));

    for (int i = 0; i < config.categories; i++)
        data.categories.push_back("cat-" + std::to_string(i));
    for (int i = config.categories - config.test_categories; i < config.categories; i++)
        data.test_category_names.push_back(data.categories[i]);

    // Planted products: ~30% get a two-word phrase (dedicated modifier +
    // head); heads and modifiers are unique across products.
    for (int p = 0; p < config.products; p++) {
        SynthProduct prod;
        bool two_word = (p % 10) < 3;
        std::string modifier = two_word ? fresh_word(rng, used) : "";
        std::string head = fresh_word(rng, used);
        if (two_word) prod.words = {modifier, head};
        else prod.words = {head};
        prod.category = data.categories[p % config.categories];
        data.products.push_back(prod);
    }

    std::vector<std::vector<int>> products_by_category(config.categories);
    for (int p = 0; p < config.products; p++)
        products_by_category[p % config.categories].push_back(p);

    // SKUs: fixed ids and titles per product.
    auto sku_id = [](int p, int k) {
        return "sku-" + std::to_string(p) + "-" + std::to_string(k);
    };
    auto sku_title = [&](int p, int k) {
        return attrs[(p + k) % attrs.size()] + " " + data.products[p].phrase();
    };

    // Ground truth: product heads, modifiers, and full phrases are products;
    // everything else in the vocabulary is not. Covers every token a
    // candidate extractor can emit from this corpus.
    for (const auto& prod : data.products) {
        data.ground_truth.labels[prod.head()] = PnLabel::P;
        if (prod.words.size() == 2) {
            data.ground_truth.labels[prod.words.front()] = PnLabel::P;
            data.ground_truth.labels[prod.phrase()] = PnLabel::P;
        }
    }
    for (const auto& w : attrs) data.ground_truth.labels[w] = PnLabel::N;
    for (const auto& w : brands) data.ground_truth.labels[w] = PnLabel::N;
    for (const auto& w : tails) data.ground_truth.labels[w] = PnLabel::N;
    for (const auto& w : junk) data.ground_truth.labels[w] = PnLabel::N;
    for (const auto& p : preps)
        data.ground_truth.labels[normalize_and_stem(p)] = PnLabel::N;

    // POS table and embeddings for the full vocabulary.
    std::vector<std::pair<std::string, Role>> vocab_roles;
    for (const auto& prod : data.products) {
        if (prod.words.size() == 2) vocab_roles.push_back({prod.words.front(), kRoleModifier});
        vocab_roles.push_back({prod.head(), kRoleHead});
    }
    for (const auto& w : attrs) vocab_roles.push_back({w, kRoleAttr});
    for (const auto& w : brands) vocab_roles.push_back({w, kRoleBrand});
    for (const auto& w : preps) vocab_roles.push_back({normalize_and_stem(w), kRolePrep});
    for (const auto& w : tails) vocab_roles.push_back({w, kRoleTail});
    for (const auto& w : junk) vocab_roles.push_back({w, kRoleJunk});

    for (const auto& [word, role] : vocab_roles)
        data.pos_table.rows[word] = pos_row(role, rng);

    nn::Matrix prototypes(config.embedding_dim, kNumRoles);
    for (int i = 0; i < config.embedding_dim; i++)
        for (int r = 0; r < kNumRoles; r++) prototypes(i, r) = rng.uniform(-1.0, 1.0);
    data.embeddings.dim = config.embedding_dim;
    for (const auto& [word, role] : vocab_roles)
        data.embeddings.vectors[word] = role_embedding(prototypes, role, rng);

    // Seed ontology: flat product concepts (head word doubles as a synonym
    // for two-word products), attributes with alternating subclasses, brands
    // with a default product slot.
    for (size_t p = 0; p < data.products.size(); p++) {
        const auto& prod = data.products[p];
        Concept c;
        c.id = prod.words.size() == 2 ? prod.words[0] + "-" + prod.words[1]
                                      : prod.head();
        c.kind = ConceptKind::Product;
        c.name = prod.phrase();
        if (prod.words.size() == 2) c.synonyms.insert(prod.head());
        data.ontology.concepts[c.id] = c;
    }
    for (size_t i = 0; i < attrs.size(); i++) {
        Concept c;
        c.id = attrs[i];
        c.kind = ConceptKind::Attribute;
        c.name = attrs[i];
        c.attribute_subclass = (i % 2 == 0) ? "color" : "material";
        data.ontology.concepts[c.id] = c;
    }
    auto product_id = [&](int p) {
        const auto& prod = data.products[p];
        return prod.words.size() == 2 ? prod.words[0] + "-" + prod.words[1]
                                      : prod.head();
    };
    for (size_t i = 0; i < brands.size(); i++) {
        Concept c;
        c.id = brands[i];
        c.kind = ConceptKind::Brand;
        c.name = brands[i];
        data.ontology.concepts[c.id] = c;
        data.ontology.default_product[c.id] =
            product_id(static_cast<int>(i) % config.products);
    }
    for (int p = 0; p < config.products; p++) {
        auto& slot = data.ontology.attributes_slot[product_id(p)];
        for (int k = 0; k < 3; k++) slot.insert(attrs[(p + k) % attrs.size()]);
    }
    for (const auto& p : preps)
        data.ontology.prepositions.insert(normalize_and_stem(p));
    data.ontology.rebuild_index();

    data.clean_config.weight_threshold = 2.0;
    data.clean_config.entropy_max = 1.5;
    for (const auto& b : brands) data.clean_config.brand_lexicon.insert(b);
    for (const auto& p : preps)
        data.clean_config.prepositions.insert(normalize_and_stem(p));

    // Query generation. Structured queries follow
    //   [brand?] attr* product-words [prep tail | attr]?
    // with the trailing attribute drawn only when no preposition tail fires,
    // at probability 1 - product_final_prob: after tail truncation those are
    // exactly the queries whose product is not final.
    auto draw_attrs = [&](int count, std::vector<std::string>& out) {
        while (static_cast<int>(out.size()) < count) {
            const std::string& w = attrs[rng.uniform_int(0, static_cast<int>(attrs.size()) - 1)];
            bool dup = false;
            for (const auto& o : out) dup |= (o == w);
            if (!dup) out.push_back(w);
        }
    };

    auto click_product = [&](const std::string& query, int p, double fixed_weight) {
        int max_picks = std::min(2, config.skus_per_product);
        int nsku = rng.uniform_int(1, max_picks);
        int first = rng.uniform_int(0, config.skus_per_product - 1);
        std::vector<int> picks = {first};
        if (nsku == 2) {
            int second = first;
            while (second == first)
                second = rng.uniform_int(0, config.skus_per_product - 1);
            picks.push_back(second);
        }
        for (int k : picks) {
            double w = fixed_weight > 0 ? fixed_weight
                                        : static_cast<double>(rng.uniform_int(2, 6));
            data.click_log.push_back({query, sku_id(p, k), sku_title(p, k),
                                      data.products[p].category, w});
        }
    };

    auto emit_tagged = [&](const std::vector<std::string>& toks,
                           const std::vector<int>& tags, int head_pos,
                           const std::string& category) {
        data.iob_by_category[category].push_back({toks, tags, category});
        LabeledQuery lq;
        lq.category = category;
        lq.tokens = toks;
        lq.labels.assign(toks.size(), 0);
        lq.labels[head_pos] = 1;
        data.cnn_queries.push_back(lq);
    };

    for (int i = 0; i < config.queries; i++) {
        if (rng.uniform() < config.noise_rate) {
            int type = rng.uniform_int(0, 3);
            if (type == 0) {
                // Broad query: heads from several categories, clicks spread
                // across min(4, categories) categories at weight 2 apiece, so
                // its entropy clears the cleaning cutoff when 4 are available.
                int span = std::min(4, config.categories);
                std::vector<std::string> toks;
                std::string query;
                std::vector<std::pair<int, int>> clicked; // product, sku
                for (int j = 0; j < span; j++) {
                    const auto& pool = products_by_category[j];
                    int p = pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)];
                    int k = rng.uniform_int(0, config.skus_per_product - 1);
                    clicked.push_back({p, k});
                    if (j < 3) toks.push_back(data.products[p].head());
                }
                query = join_tokens(toks);
                for (auto [p, k] : clicked)
                    data.click_log.push_back({query, sku_id(p, k), sku_title(p, k),
                                              data.products[p].category, 2.0});
            } else if (type == 1) {
                // Brand-only query; removed by the brand filter.
                const std::string& b = brands[rng.uniform_int(0, static_cast<int>(brands.size()) - 1)];
                int p = rng.uniform_int(0, config.products - 1);
                int k = rng.uniform_int(0, config.skus_per_product - 1);
                data.click_log.push_back({b, sku_id(p, k), sku_title(p, k),
                                          data.products[p].category,
                                          static_cast<double>(rng.uniform_int(2, 6))});
            } else if (type == 2) {
                // Junk query with a weight-1 edge; removed by the threshold
                // unless repeats of the same pair accumulate past it.
                const std::string& jw = junk[rng.uniform_int(0, kNumJunk - 1)];
                int p = rng.uniform_int(0, config.products - 1);
                int k = rng.uniform_int(0, config.skus_per_product - 1);
                data.click_log.push_back({jw, sku_id(p, k), sku_title(p, k),
                                          data.products[p].category, 1.0});
            } else {
                // Mild survivor: attribute on both sides of the product.
                int p = rng.uniform_int(0, config.products - 1);
                std::vector<std::string> qattrs;
                draw_attrs(2, qattrs);
                std::vector<std::string> toks = {qattrs[0]};
                std::vector<int> tags = {kTagO, kTagB};
                toks.insert(toks.end(), data.products[p].words.begin(),
                            data.products[p].words.end());
                if (data.products[p].words.size() == 2) tags.push_back(kTagI);
                toks.push_back(qattrs[1]);
                tags.push_back(kTagO);
                int head_pos = static_cast<int>(toks.size()) - 2;
                emit_tagged(toks, tags, head_pos, data.products[p].category);
                click_product(join_tokens(toks), p, 0);
            }
            continue;
        }

        int p = rng.uniform_int(0, config.products - 1);
        std::vector<std::string> toks;
        std::vector<int> tags;
        if (rng.uniform() < 0.3) {
            toks.push_back(brands[rng.uniform_int(0, static_cast<int>(brands.size()) - 1)]);
            tags.push_back(kTagO);
        }
        std::vector<std::string> qattrs;
        draw_attrs(rng.uniform_int(0, 3), qattrs);
        for (const auto& a : qattrs) {
            toks.push_back(a);
            tags.push_back(kTagO);
        }
        toks.insert(toks.end(), data.products[p].words.begin(),
                    data.products[p].words.end());
        tags.push_back(kTagB);
        if (data.products[p].words.size() == 2) tags.push_back(kTagI);
        int head_pos = static_cast<int>(toks.size()) - 1;
        if (rng.uniform() < config.preposition_tail_prob) {
            toks.push_back(preps[rng.uniform_int(0, static_cast<int>(preps.size()) - 1)]);
            toks.push_back(tails[rng.uniform_int(0, kNumTails - 1)]);
            tags.push_back(kTagO);
            tags.push_back(kTagO);
        } else if (rng.uniform() >= config.product_final_prob) {
            std::vector<std::string> post;
            draw_attrs(1, post);
            toks.push_back(post[0]);
            tags.push_back(kTagO);
        }
        emit_tagged(toks, tags, head_pos, data.products[p].category);
        click_product(join_tokens(toks), p, 0);
    }

    return data;
}

void write_synth(const SynthData& data, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto path = [&](const std::string& name) { return dir + "/" + name; };

    std::ostringstream log;
    log << "query\tsku_id\tsku_title\tcategory\tclicks\n";
    for (const auto& r : data.click_log)
        log << r.query << '\t' << r.sku_id << '\t' << r.sku_title << '\t'
            << r.category << '\t' << format_double(r.clicks) << '\n';
    write_file(path("click_log.tsv"), log.str());

    save_annotations(data.ground_truth, path("ground_truth.csv"));
    for (const auto& [category, sequences] : data.iob_by_category)
        write_file(path("iob_" + category + ".txt"), iob_to_text(sequences));
    write_file(path("cnn_queries.tsv"), labeled_queries_to_tsv(data.cnn_queries));
    write_file(path("pos_table.tsv"), pos_table_to_tsv(data.pos_table));
    write_file(path("embeddings.txt"), embeddings_to_text(data.embeddings));
    save_ontology(data.ontology, path("ontology.json"));

    json cc;
    cc["weight_threshold"] = data.clean_config.weight_threshold;
    cc["entropy_max"] = data.clean_config.entropy_max;
    cc["brand_lexicon"] = json::array();
    for (const auto& b : data.clean_config.brand_lexicon) cc["brand_lexicon"].push_back(b);
    cc["prepositions"] = json::array();
    for (const auto& p : data.clean_config.prepositions) cc["prepositions"].push_back(p);
    write_file(path("clean_config.json"), cc.dump(2) + "\n");

    json manifest;
    manifest["categories"] = data.categories;
    manifest["test_categories"] = data.test_category_names;
    manifest["click_rows"] = data.click_log.size();
    manifest["products"] = json::array();
    for (const auto& prod : data.products) {
        json p;
        p["phrase"] = prod.phrase();
        p["words"] = prod.words;
        p["category"] = prod.category;
        manifest["products"].push_back(p);
    }
    write_file(path("manifest.json"), manifest.dump(2) + "\n");

    write_file(path("config.json"), generator_config_to_json(data.config));
}

} // namespace ontosearch
