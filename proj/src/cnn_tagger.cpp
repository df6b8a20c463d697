#include "ontosearch/cnn_tagger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "ontosearch/errors.hpp"
#include "ontosearch/io.hpp"
#include "ontosearch/text.hpp"

using nlohmann::json;

namespace ontosearch {

const std::array<const char*, kPosTags> kPosTagNames = {
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET",
    "ADP",  "NUM",  "CONJ", "PRT", "PUNCT", "X",
};

int pos_tag_index(const std::string& tag) {
    for (int i = 0; i < kPosTags; i++)
        if (tag == kPosTagNames[i]) return i;
    throw ParseError("unknown POS tag: '" + tag + "'");
}

std::array<double, kPosTags> pos_vector(const PosTable& table, const std::string& term) {
    auto it = table.rows.find(term);
    if (it != table.rows.end()) return it->second;
    std::array<double, kPosTags> oov{};
    oov[kPosTags - 1] = 1.0; // X
    return oov;
}

PosTable pos_table_from_tsv(const std::string& text) {
    PosTable table;
    size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        std::string line = text.substr(start, end == std::string::npos ? end : end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        line_no++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string where = "pos table: line " + std::to_string(line_no);
        size_t tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(where + ": expected term<TAB>tags");
        std::string term = normalize_and_stem(line.substr(0, tab));
        if (term.empty()) throw ParseError(where + ": term normalizes to nothing");
        if (table.rows.count(term))
            throw ParseError(where + ": duplicate term '" + term + "'");

        std::array<double, kPosTags> row{};
        double sum = 0;
        for (const auto& piece : split(line.substr(tab + 1), ',')) {
            size_t colon = piece.find(':');
            if (colon == std::string::npos)
                throw ParseError(where + ": expected tag:prob, got '" + piece + "'");
            int idx = pos_tag_index(piece.substr(0, colon));
            const char* s = piece.c_str() + colon + 1;
            char* endp = nullptr;
            double p = std::strtod(s, &endp);
            if (endp == s || *endp != '\0')
                throw ParseError(where + ": bad probability '" + piece.substr(colon + 1) + "'");
            if (p < 0) throw ParseError(where + ": negative probability");
            row[idx] += p;
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ParseError(where + ": probabilities sum to " + format_double(sum) +
                             ", expected 1");
        table.rows.emplace(std::move(term), row);
    }
    return table;
}

std::string pos_table_to_tsv(const PosTable& table) {
    std::string out;
    for (const auto& [term, row] : table.rows) {
        out += term;
        out.push_back('\t');
        bool first = true;
        for (int i = 0; i < kPosTags; i++) {
            if (row[i] == 0) continue;
            if (!first) out.push_back(',');
            first = false;
            out += kPosTagNames[i];
            out.push_back(':');
            out += format_double(row[i]);
        }
        if (first) out += "X:0"; // unreachable for valid rows, keeps format total
        out.push_back('\n');
    }
    return out;
}

PosTable load_pos_table(const std::string& path) {
    return pos_table_from_tsv(read_file(path));
}

void save_pos_table(const PosTable& table, const std::string& path) {
    write_file(path, pos_table_to_tsv(table));
}

std::array<double, 3> graph_vector(const TokenGraph& graph, const std::string& token) {
    RatioScore s = ratio_score(graph, token);
    return {s.n_in, s.n_out, s.ratio};
}

double position_value(int i, int n) {
    if (i < 1 || i > n)
        throw DomainError("position " + std::to_string(i) + " outside query of length " +
                          std::to_string(n));
    return (double)(n - i);
}

FeatureSequence featurize(const std::vector<std::string>& tokens, const PosTable& pos,
                          const TokenGraph& graph, int max_len) {
    if (max_len < 1) throw DomainError("featurize: max_len must be positive");
    FeatureSequence fs;
    int n = (int)tokens.size();
    fs.real_len = std::min(n, max_len);
    fs.features = nn::Matrix::Zero(max_len, kCnnFeatureDim);
    fs.mask.assign((size_t)max_len, 0);

    for (int t = 0; t < fs.real_len; t++) {
        fs.mask[t] = 1;
        auto vp = pos_vector(pos, tokens[t]);
        for (int k = 0; k < kPosTags; k++) fs.features(t, k) = vp[k];
        std::array<double, 3> vg =
            n == 1 ? std::array<double, 3>{1.0, 1.0, 0.5} : graph_vector(graph, tokens[t]);
        for (int k = 0; k < 3; k++) fs.features(t, kPosTags + k) = vg[k];
        fs.features(t, kPosTags + 3) = position_value(t + 1, n);
    }
    return fs;
}

std::vector<LabeledQuery> labeled_queries_from_tsv(const std::string& text) {
    std::vector<LabeledQuery> out;
    size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        std::string line = text.substr(start, end == std::string::npos ? end : end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        line_no++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string where = "labeled queries: line " + std::to_string(line_no);
        auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw ParseError(where + ": expected category<TAB>tokens<TAB>labels");

        LabeledQuery q;
        q.category = fields[0];
        for (const auto& raw : split(fields[1], ' ')) {
            if (raw.empty()) continue;
            std::string tok = normalize_and_stem(raw);
            if (tok.empty())
                throw ParseError(where + ": token '" + raw + "' normalizes to nothing");
            q.tokens.push_back(std::move(tok));
        }
        for (const auto& raw : split(fields[2], ' ')) {
            if (raw.empty()) continue;
            if (raw != "0" && raw != "1")
                throw ParseError(where + ": label must be 0 or 1, got '" + raw + "'");
            q.labels.push_back(raw == "1" ? 1 : 0);
        }
        if (q.tokens.empty()) throw ParseError(where + ": empty query");
        if (q.tokens.size() != q.labels.size())
            throw ParseError(where + ": " + std::to_string(q.tokens.size()) + " tokens vs " +
                             std::to_string(q.labels.size()) + " labels");
        out.push_back(std::move(q));
    }
    return out;
}

std::string labeled_queries_to_tsv(const std::vector<LabeledQuery>& queries) {
    std::string out;
    for (const auto& q : queries) {
        out += q.category;
        out.push_back('\t');
        out += join_tokens(q.tokens);
        out.push_back('\t');
        for (size_t i = 0; i < q.labels.size(); i++) {
            if (i) out.push_back(' ');
            out += q.labels[i] ? "1" : "0";
        }
        out.push_back('\n');
    }
    return out;
}

std::vector<LabeledQuery> load_labeled_queries(const std::string& path) {
    return labeled_queries_from_tsv(read_file(path));
}

void save_labeled_queries(const std::vector<LabeledQuery>& queries, const std::string& path) {
    write_file(path, labeled_queries_to_tsv(queries));
}

namespace {

void check_config(const CnnConfig& c) {
    for (int w : c.widths)
        if (w <= 0 || w % 2 == 0)
            throw DomainError("cnn config: widths must be odd and positive");
    if (c.filters < 1) throw DomainError("cnn config: filters must be >= 1");
    if (c.max_len < 1 || c.hidden < 1) throw DomainError("cnn config: sizes must be >= 1");
}

void zero_masked_rows(nn::Matrix& m, const std::vector<char>& mask) {
    for (Eigen::Index r = 0; r < m.rows(); r++)
        if (r >= (Eigen::Index)mask.size() || !mask[r]) m.row(r).setZero();
}

} // namespace

CnnTagger::CnnTagger(const CnnConfig& config) : config_(config) {
    check_config(config_);
    conv1_ = nn::Conv1d(kCnnFeatureDim, config_.filters, config_.widths[0]);
    conv2_ = nn::Conv1d(config_.filters, config_.filters, config_.widths[1]);
    conv3_ = nn::Conv1d(config_.filters, config_.filters, config_.widths[2]);
    hidden_ = nn::Dense(config_.filters, config_.hidden);
    out_ = nn::Dense(config_.hidden, 1);
}

void CnnTagger::init(nn::Rng& rng) {
    conv1_.init_glorot(rng);
    conv2_.init_glorot(rng);
    conv3_.init_glorot(rng);
    hidden_.init_glorot(rng);
    out_.init_glorot(rng);
}

nn::Matrix CnnTagger::probabilities(const nn::Matrix& features,
                                    const std::vector<char>& mask) const {
    if (features.cols() != kCnnFeatureDim)
        throw DomainError("cnn: expected " + std::to_string(kCnnFeatureDim) +
                          " feature columns, got " + std::to_string(features.cols()));
    nn::Matrix a = features;
    zero_masked_rows(a, mask);
    a = nn::relu(conv1_.apply(a));
    zero_masked_rows(a, mask);
    a = nn::relu(conv2_.apply(a));
    zero_masked_rows(a, mask);
    a = nn::relu(conv3_.apply(a));
    zero_masked_rows(a, mask);
    a = nn::relu(hidden_.apply(a));
    return nn::sigmoid(out_.apply(a));
}

std::vector<double> CnnTagger::predict(const FeatureSequence& input) const {
    nn::Matrix p = probabilities(input.features, input.mask);
    std::vector<double> out;
    out.reserve((size_t)input.real_len);
    for (int t = 0; t < input.real_len; t++) out.push_back(p(t, 0));
    return out;
}

double CnnTagger::loss(const FeatureSequence& input, const std::vector<int>& labels) const {
    if ((int)labels.size() < input.real_len)
        throw DomainError("cnn: fewer labels than real tokens");
    nn::Matrix p = probabilities(input.features, input.mask);
    double total = 0;
    for (int t = 0; t < input.real_len; t++) {
        double pt = std::min(std::max(p(t, 0), 1e-12), 1.0 - 1e-12);
        total -= labels[t] ? std::log(pt) : std::log(1.0 - pt);
    }
    return total / std::max(1, input.real_len);
}

double CnnTagger::accumulate_gradients(const FeatureSequence& input,
                                       const std::vector<int>& labels) {
    if ((int)labels.size() < input.real_len)
        throw DomainError("cnn: fewer labels than real tokens");
    const std::vector<char>& mask = input.mask;

    nn::Matrix a0 = input.features;
    zero_masked_rows(a0, mask);
    nn::Matrix z1 = conv1_.forward(a0);
    nn::Matrix a1 = nn::relu(z1);
    zero_masked_rows(a1, mask);
    nn::Matrix z2 = conv2_.forward(a1);
    nn::Matrix a2 = nn::relu(z2);
    zero_masked_rows(a2, mask);
    nn::Matrix z3 = conv3_.forward(a2);
    nn::Matrix a3 = nn::relu(z3);
    zero_masked_rows(a3, mask);
    nn::Matrix zh = hidden_.forward(a3);
    nn::Matrix ah = nn::relu(zh);
    nn::Matrix zo = out_.forward(ah);
    nn::Matrix p = nn::sigmoid(zo);

    int n_real = std::max(1, input.real_len);
    double total = 0;
    nn::Matrix dzo = nn::Matrix::Zero(p.rows(), 1);
    for (int t = 0; t < input.real_len; t++) {
        double pt = std::min(std::max(p(t, 0), 1e-12), 1.0 - 1e-12);
        total -= labels[t] ? std::log(pt) : std::log(1.0 - pt);
        // d(BCE)/d(logit) = p - y, averaged over real tokens
        dzo(t, 0) = (p(t, 0) - (double)labels[t]) / n_real;
    }

    nn::Matrix dah = out_.backward(dzo);
    nn::Matrix dzh = nn::relu_backward(dah, zh);
    nn::Matrix da3 = hidden_.backward(dzh);
    zero_masked_rows(da3, mask);
    nn::Matrix dz3 = nn::relu_backward(da3, z3);
    nn::Matrix da2 = conv3_.backward(dz3);
    zero_masked_rows(da2, mask);
    nn::Matrix dz2 = nn::relu_backward(da2, z2);
    nn::Matrix da1 = conv2_.backward(dz2);
    zero_masked_rows(da1, mask);
    nn::Matrix dz1 = nn::relu_backward(da1, z1);
    conv1_.backward(dz1);

    return total / n_real;
}

std::vector<nn::ParamRef> CnnTagger::params() {
    std::vector<nn::ParamRef> out;
    conv1_.collect_params("conv1", out);
    conv2_.collect_params("conv2", out);
    conv3_.collect_params("conv3", out);
    hidden_.collect_params("hidden", out);
    out_.collect_params("out", out);
    return out;
}

void CnnTagger::zero_grads() {
    conv1_.zero_grad();
    conv2_.zero_grad();
    conv3_.zero_grad();
    hidden_.zero_grad();
    out_.zero_grad();
}

ComponentGraphs build_component_graphs(const ClickGraph& graph) {
    ComponentGraphs out;
    out.graph_of_query.assign(graph.queries.size(), -1);
    for (const auto& comp : connected_components(graph)) {
        std::vector<std::vector<std::string>> queries;
        for (int q : comp.queries) queries.push_back(graph.queries[q].tokens);
        int idx = (int)out.graphs.size();
        out.graphs.push_back(build_token_graph(queries));
        for (int q : comp.queries) out.graph_of_query[q] = idx;
    }
    return out;
}

namespace {

/// Features for one query against G': the component graph when the query is
/// part of one, otherwise the query's own chain graph.
FeatureSequence featurize_against(const std::vector<std::string>& tokens, const PosTable& pos,
                                  const ComponentGraphs& components,
                                  const std::map<std::string, int>& query_lookup, int max_len) {
    std::string key = join_tokens(tokens);
    auto it = query_lookup.find(key);
    if (it != query_lookup.end()) {
        int g = components.graph_of_query[it->second];
        if (g >= 0) return featurize(tokens, pos, components.graphs[g], max_len);
    }
    return featurize(tokens, pos, build_token_graph({tokens}), max_len);
}

} // namespace

CnnTrainResult train_cnn(const std::vector<LabeledQuery>& data, const PosTable& pos,
                         const ClickGraph& graph, const CnnConfig& config) {
    if (data.empty()) throw DomainError("cnn train: empty dataset");
    check_config(config);

    ComponentGraphs components = build_component_graphs(graph);
    std::map<std::string, int> query_lookup;
    for (size_t q = 0; q < graph.queries.size(); q++)
        query_lookup.emplace(join_tokens(graph.queries[q].tokens), (int)q);

    std::vector<FeatureSequence> features;
    features.reserve(data.size());
    for (const auto& q : data)
        features.push_back(
            featurize_against(q.tokens, pos, components, query_lookup, config.max_len));

    CnnTrainResult result{CnnTagger(config), 0.0};
    nn::Rng rng(config.seed);
    result.model.init(rng);

    auto params = result.model.params();
    nn::AdamConfig adam_config;
    adam_config.lr = config.lr;
    nn::Adam adam(adam_config, params);

    for (int epoch = 0; epoch < config.epochs; epoch++) {
        double epoch_loss = 0;
        for (size_t i = 0; i < data.size(); i++) {
            result.model.zero_grads();
            epoch_loss += result.model.accumulate_gradients(features[i], data[i].labels);
            adam.step(params);
        }
        result.final_loss = epoch_loss / (double)data.size();
    }
    return result;
}

CandidateList extract_cnn_candidates(const CnnTagger& model, const PosTable& pos,
                                     const ClickGraph& graph, double threshold) {
    double p_star = threshold < 0 ? model.config().threshold : threshold;
    ComponentGraphs components = build_component_graphs(graph);

    std::map<std::string, int> freq;
    for (size_t q = 0; q < graph.queries.size(); q++) {
        const auto& tokens = graph.queries[q].tokens;
        if (tokens.empty()) continue;
        int g = components.graph_of_query[q];
        FeatureSequence fs =
            g >= 0 ? featurize(tokens, pos, components.graphs[g], model.config().max_len)
                   : featurize(tokens, pos, build_token_graph({tokens}), model.config().max_len);
        std::vector<double> probs = model.predict(fs);
        std::set<std::string> flagged;
        for (int t = 0; t < fs.real_len; t++)
            if (probs[t] >= p_star) flagged.insert(tokens[t]);
        for (const auto& term : flagged) freq[term]++;
    }
    return rank_candidates(freq);
}

std::string cnn_to_json(const CnnTagger& model) {
    const CnnConfig& c = model.config();
    json config;
    config["widths"] = c.widths;
    config["filters"] = c.filters;
    config["max_len"] = c.max_len;
    config["hidden"] = c.hidden;
    config["epochs"] = c.epochs;
    config["lr"] = c.lr;
    config["threshold"] = c.threshold;
    config["seed"] = c.seed;
    // params() needs a mutable model; checkpointing never mutates values
    auto params = const_cast<CnnTagger&>(model).params();
    return nn::checkpoint_to_json(config.dump(), params);
}

CnnTagger cnn_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("cnn checkpoint: ") + e.what());
    }
    if (!j.contains("config")) throw ParseError("cnn checkpoint: missing 'config'");
    CnnConfig c;
    try {
        const json& jc = j["config"];
        jc.at("widths").get_to(c.widths);
        c.filters = jc.at("filters").get<int>();
        c.max_len = jc.at("max_len").get<int>();
        c.hidden = jc.at("hidden").get<int>();
        c.epochs = jc.at("epochs").get<int>();
        c.lr = jc.at("lr").get<double>();
        c.threshold = jc.at("threshold").get<double>();
        c.seed = jc.at("seed").get<uint64_t>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("cnn checkpoint: bad config: ") + e.what());
    }
    CnnTagger model(c);
    auto params = model.params();
    nn::checkpoint_from_json(text, params);
    return model;
}

CnnTagger load_cnn(const std::string& path) {
    return cnn_from_json(read_file(path));
}

void save_cnn(const CnnTagger& model, const std::string& path) {
    write_file(path, cnn_to_json(model));
}

} // namespace ontosearch
