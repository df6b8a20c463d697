// Acceptance harness: one line per criterion, PASS or FAIL, nonzero exit
// when anything fails. Each check is self-contained and uses only the
// public library API, so a failure points at the library, not the harness.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ontosearch/annotator.hpp"
#include "ontosearch/candidates.hpp"
#include "ontosearch/click_graph.hpp"
#include "ontosearch/cnn_tagger.hpp"
#include "ontosearch/eval.hpp"
#include "ontosearch/lstm_crf.hpp"
#include "ontosearch/nn.hpp"
#include "ontosearch/ontology.hpp"
#include "ontosearch/retrieval.hpp"
#include "ontosearch/synth.hpp"
#include "ontosearch/text.hpp"
#include "ontosearch/token_graph.hpp"
#include "test_util.hpp"

using namespace ontosearch;

namespace {

constexpr double kLogZTol = 1e-8;     // forward algorithm vs brute force
constexpr double kGradTol = 1e-4;     // max relative error, finite differences
constexpr double kCrfBudgetSec = 30;  // criterion 1
constexpr double kGradBudgetSec = 60; // criterion 2
constexpr double kSynthBudgetSec = 600; // criterion 7
constexpr double kTokenGraphFloor = 0.8; // criterion 7, precision@50
constexpr double kSpanRecoveryFloor = 0.9; // criterion 7, multi-word spans

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

struct Outcome {
    bool pass = false;
    std::string note;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

// --- criterion 1 -----------------------------------------------------------

Outcome crf_oracle_equivalence() {
    Stopwatch watch;
    nn::Rng rng(42);
    int checked = 0;
    for (int draw = 0; draw < 200; draw++) {
        Crf crf;
        for (int i = 0; i < kNumTags; i++) {
            crf.start(i, 0) = rng.uniform(-2.0, 2.0);
            crf.stop(i, 0) = rng.uniform(-2.0, 2.0);
            for (int j = 0; j < kNumTags; j++) crf.transition(i, j) = rng.uniform(-2.0, 2.0);
        }
        for (int len = 1; len <= 5; len++) {
            nn::Matrix emissions(len, kNumTags);
            for (int t = 0; t < len; t++)
                for (int j = 0; j < kNumTags; j++) emissions(t, j) = rng.uniform(-2.0, 2.0);

            // Exhaustive enumeration of all 3^len paths.
            std::vector<int> tags(len, 0), best_tags;
            double best = -std::numeric_limits<double>::infinity();
            std::vector<double> scores;
            bool done = false;
            while (!done) {
                double s = crf_path_score(emissions, tags, crf);
                scores.push_back(s);
                if (s > best) {
                    best = s;
                    best_tags = tags;
                }
                int pos = len - 1;
                while (pos >= 0 && ++tags[pos] == kNumTags) tags[pos--] = 0;
                done = pos < 0;
            }
            double max_s = best;
            double sum = 0;
            for (double s : scores) sum += std::exp(s - max_s);
            double brute_log_z = max_s + std::log(sum);

            auto [viterbi_tags, viterbi_score] = viterbi_decode(emissions, crf);
            if (viterbi_tags != best_tags)
                return {false, "viterbi path diverges from exhaustive argmax at draw " +
                                   std::to_string(draw) + ", length " + std::to_string(len)};
            if (std::abs(viterbi_score - best) > kLogZTol)
                return {false, fmt("viterbi score off by %.3g", std::abs(viterbi_score - best))};
            double log_z = crf_log_partition(emissions, crf);
            if (std::abs(log_z - brute_log_z) > kLogZTol)
                return {false, fmt("log partition off by %.3g at length %.0f",
                                   std::abs(log_z - brute_log_z), len)};
            checked++;
        }
    }
    double sec = watch.seconds();
    if (sec >= kCrfBudgetSec) return {false, fmt("took %.1f s, budget %.0f s", sec, kCrfBudgetSec)};
    return {true, fmt("%.0f decodes exact, log Z within 1e-8, %.1f s", checked, sec)};
}

// --- criterion 2 -----------------------------------------------------------

Outcome gradient_fidelity() {
    Stopwatch watch;
    nn::Rng rng(7);
    auto fill = [&](nn::Matrix& m, double lo, double hi) {
        for (Eigen::Index i = 0; i < m.rows(); i++)
            for (Eigen::Index j = 0; j < m.cols(); j++) m(i, j) = rng.uniform(lo, hi);
    };
    double worst = 0;
    auto track = [&](double err, const char* name) {
        if (err > worst) worst = err;
        return err < kGradTol ? std::string() : std::string(name) + fmt(" gradient error %.2e", err);
    };

    { // conv1d
        nn::Conv1d conv(3, 2, 3);
        conv.init_glorot(rng);
        nn::Matrix x(5, 3), upstream(5, 2);
        fill(x, -1, 1);
        fill(upstream, -1, 1);
        std::vector<nn::ParamRef> params;
        conv.collect_params("conv", params);
        double err = nn::gradient_check(
            params, [&] { return (conv.apply(x).cwiseProduct(upstream)).sum(); },
            [&] {
                conv.zero_grad();
                conv.forward(x);
                conv.backward(upstream);
            });
        if (auto bad = track(err, "conv1d"); !bad.empty()) return {false, bad};
    }
    { // dense
        nn::Dense dense(4, 3);
        dense.init_glorot(rng);
        nn::Matrix x(6, 4), upstream(6, 3);
        fill(x, -1, 1);
        fill(upstream, -1, 1);
        std::vector<nn::ParamRef> params;
        dense.collect_params("dense", params);
        double err = nn::gradient_check(
            params, [&] { return (dense.apply(x).cwiseProduct(upstream)).sum(); },
            [&] {
                dense.zero_grad();
                dense.forward(x);
                dense.backward(upstream);
            });
        if (auto bad = track(err, "dense"); !bad.empty()) return {false, bad};
    }
    { // single LSTM cell (one step, so only the cell equations are in play)
        LstmDirection cell(3, 2);
        cell.init_glorot(rng);
        nn::Matrix x(1, 3), upstream(1, 2);
        fill(x, -1, 1);
        fill(upstream, -1, 1);
        std::vector<nn::ParamRef> params;
        cell.collect_params("cell", params);
        double err = nn::gradient_check(
            params, [&] { return (cell.apply(x).cwiseProduct(upstream)).sum(); },
            [&] {
                cell.zero_grad();
                cell.forward(x);
                cell.backward(upstream);
            });
        if (auto bad = track(err, "lstm cell"); !bad.empty()) return {false, bad};
    }
    { // bidirectional pair over a real sequence
        LstmDirection fwd(3, 2), bwd(3, 2);
        fwd.init_glorot(rng);
        bwd.init_glorot(rng);
        nn::Matrix x(4, 3), up_f(4, 2), up_b(4, 2);
        fill(x, -1, 1);
        fill(up_f, -1, 1);
        fill(up_b, -1, 1);
        auto flip = [](const nn::Matrix& m) {
            nn::Matrix r(m.rows(), m.cols());
            for (Eigen::Index i = 0; i < m.rows(); i++) r.row(i) = m.row(m.rows() - 1 - i);
            return r;
        };
        std::vector<nn::ParamRef> params;
        fwd.collect_params("fwd", params);
        bwd.collect_params("bwd", params);
        double err = nn::gradient_check(
            params,
            [&] {
                return (fwd.apply(x).cwiseProduct(up_f)).sum() +
                       (flip(bwd.apply(flip(x))).cwiseProduct(up_b)).sum();
            },
            [&] {
                fwd.zero_grad();
                bwd.zero_grad();
                fwd.forward(x);
                fwd.backward(up_f);
                bwd.forward(flip(x));
                bwd.backward(flip(up_b));
            });
        if (auto bad = track(err, "bilstm"); !bad.empty()) return {false, bad};
    }
    { // CRF: gradients w.r.t. emissions and all CRF parameters
        Crf crf;
        fill(crf.transition, -1, 1);
        fill(crf.start, -1, 1);
        fill(crf.stop, -1, 1);
        nn::Matrix emissions(4, kNumTags), d_emissions(4, kNumTags);
        fill(emissions, -1, 1);
        std::vector<int> tags = {kTagO, kTagB, kTagI, kTagO};
        std::vector<nn::ParamRef> params;
        params.push_back({"emissions", &emissions, &d_emissions, {4, kNumTags}});
        crf.collect_params("crf", params);
        double err = nn::gradient_check(
            params, [&] { return -crf_log_likelihood(emissions, tags, crf); },
            [&] {
                crf.zero_grad();
                d_emissions.setZero();
                crf_nll_backward(emissions, tags, crf, d_emissions);
            });
        if (auto bad = track(err, "crf"); !bad.empty()) return {false, bad};
    }
    double sec = watch.seconds();
    if (sec >= kGradBudgetSec)
        return {false, fmt("took %.1f s, budget %.0f s", sec, kGradBudgetSec)};
    return {true, fmt("worst relative error %.2e, %.1f s", worst, sec)};
}

// --- criterion 3 -----------------------------------------------------------

Outcome dress_fixture() {
    TokenGraph graph = build_token_graph({{"women", "dress"},
                                          {"white", "dress"},
                                          {"dkny", "sleeveless", "dress", "white"}});
    RatioScore dress = ratio_score(graph, "dress");
    bool ok = dress.n_in == 3.0 && dress.n_out == 1.0 && dress.ratio == 0.75 &&
              product_candidate(graph).token == "dress";
    return {ok, fmt("dress: N_i=%.0f N_o=%.0f ratio=%.2f", dress.n_in, dress.n_out, dress.ratio)};
}

// --- criterion 4 -----------------------------------------------------------

Outcome preposition_fixture() {
    std::vector<std::string> tokens = {"seven", "for", "all", "mankind", "skinny", "jeans"};
    std::vector<std::string> out =
        truncate_at_preposition(tokens, {"for", "with", "of", "in", "on"});
    bool ok = out == std::vector<std::string>{"seven"};
    std::string got;
    for (const auto& t : out) got += (got.empty() ? "" : " ") + t;
    return {ok, "truncated to [" + got + "]"};
}

// --- criterion 5 -----------------------------------------------------------

Outcome table1_fixture() {
    auto ranked = [](const std::vector<std::string>& terms) {
        CandidateList out;
        for (size_t i = 0; i < terms.size(); i++)
            out.push_back({static_cast<int>(i) + 1, terms[i],
                           static_cast<int>(terms.size() - i)});
        return out;
    };
    auto annotated = [](const std::vector<std::string>& terms, const std::string& labels) {
        AnnotationSet s;
        for (size_t i = 0; i < terms.size(); i++)
            s.labels[terms[i]] = labels[i] == 'P' ? PnLabel::P : PnLabel::N;
        return s;
    };
    std::vector<std::string> graph_terms = {"all",    "sippycup",  "cup",  "bib",
                                            "playard", "insert",   "ct",   "highchair",
                                            "case",   "stroller"};
    std::vector<std::string> aug_terms = {"diaper", "wipe", "formula", "carseat", "bottle",
                                          "stroller", "bag", "gate", "cereal", "highchair"};
    std::vector<std::string> ner_terms = {"diaper", "wipe", "bottle", "bag", "cover",
                                          "ups", "pants", "seat", "pad", "bib"};
    double p_graph =
        precision_at_n(ranked(graph_terms), annotated(graph_terms, "NPPPPPNPPP"), 10).back()
            .precision;
    double p_aug =
        precision_at_n(ranked(aug_terms), annotated(aug_terms, "PPPPPPPPPP"), 10).back().precision;
    double p_ner =
        precision_at_n(ranked(ner_terms), annotated(ner_terms, "PPPPPNPPPP"), 10).back().precision;
    bool ok = p_graph == 0.8 && p_aug == 1.0 && p_ner == 0.9;
    return {ok, fmt("precision@10 = %.1f / %.1f / %.1f (graph / augmented / sequence)", p_graph,
                    p_aug, p_ner)};
}

// --- criterion 6 -----------------------------------------------------------

Outcome entropy_cleaning() {
    CleanConfig config;
    config.weight_threshold = 2.0;
    config.entropy_max = 1.5;

    std::vector<ClickRecord> records;
    for (int c = 0; c < 4; c++) // uniform over 4 categories: H = 2 bits
        records.push_back({"baby stuff", "b" + std::to_string(c), "title",
                           "cat" + std::to_string(c), 3.0});
    records.push_back({"wooden crib", "crib-1", "crib", "nursery", 3.0});
    records.push_back({"wooden crib", "crib-2", "crib deluxe", "nursery", 4.0});
    ClickGraph cleaned = clean(ingest(records), config);
    bool broad_gone = true, narrow_kept = false;
    for (const auto& q : cleaned.queries) {
        if (q.raw == "baby stuff") broad_gone = false;
        if (q.raw == "wooden crib") narrow_kept = true;
    }
    if (!broad_gone || !narrow_kept)
        return {false, std::string(!broad_gone ? "H=2.0 query survived" : "H=0 query dropped")};

    // Idempotence on a 1000-edge random graph.
    nn::Rng rng(99);
    std::vector<std::string> vocab = {"lamp", "desk", "sofa", "crib", "mat", "fan", "rug", "bin"};
    std::vector<ClickRecord> random_records;
    for (int q = 0; q < 200; q++) {
        std::string text = vocab[rng.uniform_int(0, 7)] + " " + vocab[rng.uniform_int(0, 7)] +
                           " " + std::to_string(q);
        for (int e = 0; e < 5; e++)
            random_records.push_back({text, "s" + std::to_string(q * 5 + e), "title " + text,
                                      "cat" + std::to_string(rng.uniform_int(0, 5)),
                                      rng.uniform(0.0, 5.0)});
    }
    ClickGraph raw = ingest(random_records);
    if (raw.edge_count() != 1000)
        return {false, fmt("expected 1000 edges, built %.0f", double(raw.edge_count()))};
    ClickGraph once = clean(raw, config);
    ClickGraph twice = clean(once, config);
    if (!(once == twice)) return {false, "clean(clean(G)) != clean(G)"};
    return {true, fmt("broad query dropped, narrow kept, idempotent on %.0f edges",
                      double(raw.edge_count()))};
}

// --- criterion 7 -----------------------------------------------------------

Outcome synthetic_end_to_end() {
    Stopwatch watch;
    GeneratorConfig config; // 5000 queries, 50 products, 7 categories, 1 held out
    SynthData data = generate(config);

    ClickGraph cleaned = clean(ingest(data.click_log), data.clean_config);
    CandidateList tg_all = extract_token_graph_candidates(cleaned, data.clean_config);
    double tg_p50 = precision_at_n(tg_all, data.ground_truth, 50).back().precision;
    if (tg_p50 < kTokenGraphFloor)
        return {false, fmt("token-graph precision@50 = %.3f < %.1f", tg_p50, kTokenGraphFloor)};

    // Held-out category: the CNN trains on the other six and must match or
    // beat the heuristic where both emit candidates.
    const std::string& held = data.test_category_names.front();
    std::vector<ClickRecord> train_records, held_records;
    for (const auto& r : data.click_log)
        (r.category == held ? held_records : train_records).push_back(r);
    ClickGraph train_graph = clean(ingest(train_records), data.clean_config);
    ClickGraph held_graph = clean(ingest(held_records), data.clean_config);

    CandidateList tg_held = extract_token_graph_candidates(held_graph, data.clean_config);
    std::vector<LabeledQuery> train_queries;
    for (const auto& q : data.cnn_queries)
        if (q.category != held) train_queries.push_back(q);
    CnnTrainResult cnn = train_cnn(train_queries, data.pos_table, train_graph, CnnConfig{});
    CandidateList cnn_held = extract_cnn_candidates(cnn.model, data.pos_table, held_graph);
    if (tg_held.empty() || cnn_held.empty())
        return {false, "no candidates on the held-out category"};
    int common = std::min({100, static_cast<int>(tg_held.size()),
                           static_cast<int>(cnn_held.size())});
    double tg_p = precision_at_n(tg_held, data.ground_truth, common).back().precision;
    double cnn_p = precision_at_n(cnn_held, data.ground_truth, common).back().precision;
    if (cnn_p < tg_p)
        return {false, fmt("held-out precision@%.0f: cnn %.3f < token-graph %.3f", common, cnn_p,
                           tg_p)};

    // Span recovery over training-distribution queries.
    std::vector<IobSequence> train_iob;
    for (const auto& [category, sequences] : data.iob_by_category)
        if (category != held) train_iob.insert(train_iob.end(), sequences.begin(),
                                               sequences.end());
    LstmCrfConfig lstm_config;
    lstm_config.dim = config.embedding_dim;
    LstmCrfTrainResult lstm = train_lstm_crf(train_iob, data.embeddings, lstm_config);
    CandidateList spans = extract_lstm_crf_candidates(lstm.model, cleaned);
    std::set<std::string> span_terms;
    for (const auto& row : spans) span_terms.insert(row.term);
    int multi_word = 0, recovered = 0;
    for (const auto& product : data.products) {
        if (product.words.size() < 2) continue;
        multi_word++;
        if (span_terms.count(product.phrase())) recovered++;
    }
    if (recovered < kSpanRecoveryFloor * multi_word)
        return {false, fmt("spans recovered %.0f of %.0f multi-word products", recovered,
                           multi_word)};

    double sec = watch.seconds();
    if (sec >= kSynthBudgetSec)
        return {false, fmt("took %.1f s, budget %.0f s", sec, kSynthBudgetSec)};
    return {true, fmt("tg p@50=%.3f; held-out cnn %.3f >= tg %.3f", tg_p50, cnn_p, tg_p) +
                      fmt("; spans %.0f/%.0f; %.1f s", recovered, multi_word, watch.seconds())};
}

// --- criterion 8 -----------------------------------------------------------

Outcome retrieval_fixtures() {
    Ontology onto;
    auto put = [&](std::string id, ConceptKind kind, std::string name,
                   std::optional<std::string> subclass = {},
                   std::optional<std::string> parent = {},
                   std::set<std::string> synonyms = {}) {
        Concept c;
        c.id = std::move(id);
        c.kind = kind;
        c.name = normalize_phrase(name);
        for (const auto& s : synonyms) c.synonyms.insert(normalize_phrase(s));
        c.attribute_subclass = std::move(subclass);
        c.parent = std::move(parent);
        onto.concepts[c.id] = c;
    };
    put("shirt", ConceptKind::Product, "shirt");
    put("tv", ConceptKind::Product, "tv");
    put("stool", ConceptKind::Product, "stool");
    put("barstool", ConceptKind::Product, "bar stool", {}, "stool", {"barstool"});
    put("tissues", ConceptKind::Product, "tissues");
    put("cotton", ConceptKind::Attribute, "cotton", "material");
    put("polyester", ConceptKind::Attribute, "polyester", "material");
    put("kleenex", ConceptKind::Brand, "kleenex");
    put("puffs", ConceptKind::Brand, "puffs");
    onto.attributes_slot["shirt"] = {"cotton", "polyester"};
    onto.default_product["kleenex"] = "tissues";
    onto.rebuild_index();

    auto sku = [](std::string id, std::string title, std::string product) {
        SkuRecord r;
        r.sku_id = std::move(id);
        r.title = std::move(title);
        r.product_class = std::move(product);
        r.category = "acceptance";
        return r;
    };
    std::vector<SkuRecord> catalog;
    SkuRecord cotton_shirt = sku("shirt-cotton", "cotton crew shirt", "shirt");
    cotton_shirt.attributes = {"cotton"};
    cotton_shirt.primary_attribute = "cotton";
    SkuRecord poly_shirt = sku("shirt-poly", "polyester crew shirt", "shirt");
    poly_shirt.attributes = {"polyester"};
    poly_shirt.primary_attribute = "polyester";
    SkuRecord tv43 = sku("tv-43", "43 inch tv", "tv");
    tv43.numeric_attributes["size"] = {43.0, "inch", 43.0 * 2.54, std::nullopt};
    SkuRecord tv49 = sku("tv-49", "49 inch tv", "tv");
    tv49.numeric_attributes["size"] = {49.0, "inch", 49.0 * 2.54, std::nullopt};
    SkuRecord tissues_kleenex = sku("tissue-kleenex", "kleenex tissues", "tissues");
    tissues_kleenex.brand = "kleenex";
    SkuRecord tissues_puffs = sku("tissue-puffs", "puffs tissues", "tissues");
    tissues_puffs.brand = "puffs";
    catalog = {cotton_shirt, poly_shirt, tv43, tv49,
               sku("stool-plain", "shop stool", "stool"),
               sku("stool-bar", "swivel bar stool", "barstool"),
               tissues_kleenex, tissues_puffs};
    SkuIndex index = index_skus(catalog, onto);

    ScoreWeights weights; // defaults
    auto rank_of = [&](const SearchResult& result, const std::string& id) {
        for (size_t i = 0; i < result.results.size(); i++)
            if (result.results[i].sku_id == id) return static_cast<int>(i);
        return -1;
    };
    auto run = [&](const std::string& query) {
        return search(apply_default_product(annotate(query, onto), onto), index, weights, 10);
    };

    SearchResult cotton = run("cotton shirt");
    int rc = rank_of(cotton, "shirt-cotton"), rp = rank_of(cotton, "shirt-poly");
    if (rc < 0 || rp < 0 || rc >= rp)
        return {false, "cotton shirt: primary-cotton SKU not strictly above primary-polyester"};

    SearchResult tv = run("45 inch tv");
    int r43 = rank_of(tv, "tv-43"), r49 = rank_of(tv, "tv-49");
    if (r43 < 0 || r49 < 0 || r43 >= r49)
        return {false, "45 inch tv: 43-inch SKU not above 49-inch SKU"};

    SearchResult stool = run("stool");
    if (rank_of(stool, "stool-bar") < 0 || rank_of(stool, "stool-plain") < 0)
        return {false, "stool: barstool SKU missing from recall"};

    SearchResult kleenex = run("kleenex");
    int rk = rank_of(kleenex, "tissue-kleenex"), rf = rank_of(kleenex, "tissue-puffs");
    if (rk < 0 || rf < 0 || rk >= rf)
        return {false, "kleenex: tissue SKUs absent or Kleenex not ranked above Puffs"};

    return {true, "all four orderings hold under default weights"};
}

// --- criterion 9 -----------------------------------------------------------

Outcome round_trips() {
    testutil::TempDir dir;
    // Ontologies from the corpus generator: canonical by construction.
    for (int i = 0; i < 100; i++) {
        GeneratorConfig config;
        config.seed = 1000 + i;
        config.products = 3 + i % 9;
        config.attributes = 4 + i % 5;
        config.brands = 1 + i % 4;
        config.categories = 1 + i % 3;
        config.test_categories = 0;
        config.queries = 0;
        config.embedding_dim = 4;
        Ontology original = generate(config).ontology;
        std::string path = dir.file("onto.json");
        save_ontology(original, path);
        Ontology reloaded = load_ontology(path);
        if (!(reloaded == original))
            return {false, "ontology instance " + std::to_string(i) + " changed on reload"};
        if (ontology_to_json(reloaded) != ontology_to_json(original))
            return {false, "ontology instance " + std::to_string(i) + " serialization drifted"};
    }
    // Model checkpoints: parameters must survive save/load bit-exactly.
    for (int i = 0; i < 50; i++) {
        CnnConfig config;
        config.filters = 2 + i % 3;
        config.max_len = 8;
        config.hidden = 3 + i % 2;
        config.seed = 100 + i;
        CnnTagger model(config);
        nn::Rng rng(config.seed);
        model.init(rng);
        std::string path = dir.file("cnn.json");
        save_cnn(model, path);
        if (cnn_to_json(load_cnn(path)) != cnn_to_json(model))
            return {false, "cnn checkpoint " + std::to_string(i) + " drifted"};
    }
    for (int i = 0; i < 50; i++) {
        LstmCrfConfig config;
        config.dim = 3 + i % 3;
        config.hidden = 2 + i % 2;
        config.seed = 200 + i;
        EmbeddingTable table;
        table.dim = config.dim;
        nn::Rng rng(config.seed);
        for (const char* word : {"alpha", "beta", "gamma"}) {
            nn::Vector v(config.dim);
            for (int d = 0; d < config.dim; d++) v(d) = rng.uniform(-1.0, 1.0);
            table.vectors[word] = v;
        }
        LstmCrfTagger model(config, table);
        model.init(rng);
        std::string path = dir.file("lstm.json");
        save_lstm_crf(model, path);
        if (lstm_crf_to_json(load_lstm_crf(path, table)) != lstm_crf_to_json(model))
            return {false, "lstm-crf checkpoint " + std::to_string(i) + " drifted"};
    }
    return {true, "100 ontologies and 100 checkpoints reload identically"};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria = {
        {1, "CRF oracle equivalence", crf_oracle_equivalence},
        {2, "gradient fidelity", gradient_fidelity},
        {3, "token-graph dress fixture", dress_fixture},
        {4, "preposition truncation fixture", preposition_fixture},
        {5, "frozen top-10 precision fixture", table1_fixture},
        {6, "entropy cleaning", entropy_cleaning},
        {7, "synthetic end-to-end", synthetic_end_to_end},
        {8, "retrieval orderings", retrieval_fixtures},
        {9, "save/load round-trips", round_trips},
    };
    int failures = 0;
    for (const auto& criterion : criteria) {
        Outcome outcome;
        try {
            outcome = criterion.check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d (%s): %s — %s\n", criterion.id, criterion.name,
                    outcome.pass ? "PASS" : "FAIL", outcome.note.c_str());
        std::fflush(stdout);
        if (!outcome.pass) failures++;
    }
    return failures;
}
