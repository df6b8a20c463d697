#include "ontosearch/lstm_crf.hpp"

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

std::string tag_name(int tag) {
    switch (tag) {
        case kTagO: return "O";
        case kTagB: return "B-PRODUCT";
        case kTagI: return "I-PRODUCT";
    }
    throw DomainError("tag id out of range: " + std::to_string(tag));
}

int tag_from_name(const std::string& name) {
    if (name == "O") return kTagO;
    if (name == "B-PRODUCT") return kTagB;
    if (name == "I-PRODUCT") return kTagI;
    throw ParseError("unknown IOB tag: '" + name + "'");
}

bool valid_iob(const std::vector<int>& tags) {
    int prev = kTagO;
    for (int t : tags) {
        if (t < 0 || t >= kNumTags) return false;
        if (t == kTagI && prev == kTagO) return false;
        prev = t;
    }
    return true;
}

std::vector<std::string> extract_product_spans(const IobSequence& tagged) {
    if (tagged.tokens.size() != tagged.tags.size())
        throw DomainError("iob: token/tag length mismatch");
    if (!valid_iob(tagged.tags)) throw DomainError("iob: I-PRODUCT without an open span");

    std::vector<std::string> out;
    std::string span;
    for (size_t i = 0; i < tagged.tags.size(); i++) {
        if (tagged.tags[i] == kTagB) {
            if (!span.empty()) out.push_back(span);
            span = tagged.tokens[i];
        } else if (tagged.tags[i] == kTagI) {
            span += " " + tagged.tokens[i];
        } else if (!span.empty()) {
            out.push_back(span);
            span.clear();
        }
    }
    if (!span.empty()) out.push_back(span);
    return out;
}

std::vector<IobSequence> iob_from_text(const std::string& text) {
    std::vector<IobSequence> out;
    IobSequence cur;
    size_t seq_start_line = 0;

    auto flush = [&](size_t line_no) {
        if (cur.tokens.empty()) return;
        if (!valid_iob(cur.tags))
            throw ParseError("iob: query starting at line " + std::to_string(seq_start_line) +
                             ": I-PRODUCT without an open span");
        out.push_back(std::move(cur));
        cur = IobSequence{};
        (void)line_no;
    };

    size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        std::string line = text.substr(start, end == std::string::npos ? end : end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        line_no++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush(line_no);
            continue;
        }
        std::string where = "iob: line " + std::to_string(line_no);
        size_t tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(where + ": expected token<TAB>tag");
        std::string tok = normalize_and_stem(line.substr(0, tab));
        if (tok.empty()) throw ParseError(where + ": token normalizes to nothing");
        if (cur.tokens.empty()) seq_start_line = line_no;
        cur.tokens.push_back(std::move(tok));
        try {
            cur.tags.push_back(tag_from_name(line.substr(tab + 1)));
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    flush(line_no);
    return out;
}

std::string iob_to_text(const std::vector<IobSequence>& sequences) {
    std::string out;
    for (size_t s = 0; s < sequences.size(); s++) {
        if (s) out.push_back('\n');
        const auto& seq = sequences[s];
        for (size_t i = 0; i < seq.tokens.size(); i++) {
            out += seq.tokens[i];
            out.push_back('\t');
            out += tag_name(seq.tags[i]);
            out.push_back('\n');
        }
    }
    return out;
}

std::vector<IobSequence> load_iob(const std::string& path) {
    return iob_from_text(read_file(path));
}

void save_iob(const std::vector<IobSequence>& sequences, const std::string& path) {
    write_file(path, iob_to_text(sequences));
}

EmbeddingTable embeddings_from_text(const std::string& text) {
    EmbeddingTable table;
    size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        std::string line = text.substr(start, end == std::string::npos ? end : end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        line_no++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string where = "embeddings: line " + std::to_string(line_no);
        std::vector<std::string> pieces;
        for (const auto& p : split(line, ' '))
            if (!p.empty()) pieces.push_back(p);
        if (pieces.size() < 2) throw ParseError(where + ": expected term followed by values");

        std::string term = normalize_and_stem(pieces[0]);
        if (term.empty()) throw ParseError(where + ": term normalizes to nothing");
        int dim = (int)pieces.size() - 1;
        if (table.dim == 0)
            table.dim = dim;
        else if (dim != table.dim)
            throw ParseError(where + ": expected " + std::to_string(table.dim) +
                             " values, got " + std::to_string(dim));
        if (table.vectors.count(term)) continue; // first spelling wins

        nn::Vector v(dim);
        for (int k = 0; k < dim; k++) {
            const char* s = pieces[k + 1].c_str();
            char* endp = nullptr;
            v(k) = std::strtod(s, &endp);
            if (endp == s || *endp != '\0')
                throw ParseError(where + ": bad value '" + pieces[k + 1] + "'");
        }
        table.vectors.emplace(std::move(term), std::move(v));
    }
    return table;
}

std::string embeddings_to_text(const EmbeddingTable& table) {
    std::string out;
    for (const auto& [term, v] : table.vectors) {
        out += term;
        for (Eigen::Index k = 0; k < v.size(); k++) {
            out.push_back(' ');
            out += format_double(v(k));
        }
        out.push_back('\n');
    }
    return out;
}

EmbeddingTable load_embeddings(const std::string& path) {
    return embeddings_from_text(read_file(path));
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
    write_file(path, embeddings_to_text(table));
}

namespace {

nn::Vector vsigmoid(const nn::Vector& x) {
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

nn::Vector vtanh(const nn::Vector& x) {
    return x.array().tanh().matrix();
}

double logsumexp3(const double* v) {
    double mx = std::max(v[0], std::max(v[1], v[2]));
    return mx + std::log(std::exp(v[0] - mx) + std::exp(v[1] - mx) + std::exp(v[2] - mx));
}

} // namespace

LstmDirection::LstmDirection(int input_dim, int hidden_dim) : in_(input_dim), hidden_(hidden_dim) {
    if (input_dim < 1 || hidden_dim < 1)
        throw DomainError("lstm: dimensions must be positive");
    auto zeros = [&](int r, int c) { return nn::Matrix::Zero(r, c); };
    w_xi = zeros(hidden_, in_);
    w_hi = zeros(hidden_, hidden_);
    w_ci = zeros(hidden_, 1);
    b_i = zeros(hidden_, 1);
    w_xc = zeros(hidden_, in_);
    w_hc = zeros(hidden_, hidden_);
    b_c = zeros(hidden_, 1);
    w_xo = zeros(hidden_, in_);
    w_ho = zeros(hidden_, hidden_);
    w_co = zeros(hidden_, 1);
    b_o = zeros(hidden_, 1);
    zero_grad();
}

void LstmDirection::init_glorot(nn::Rng& rng) {
    auto fill = [&](nn::Matrix& m) {
        double bound = std::sqrt(6.0 / (double)(m.rows() + m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); r++)
            for (Eigen::Index c = 0; c < m.cols(); c++) m(r, c) = rng.uniform(-bound, bound);
    };
    fill(w_xi);
    fill(w_hi);
    fill(w_xc);
    fill(w_hc);
    fill(w_xo);
    fill(w_ho);
    // peepholes and biases start at zero
    w_ci.setZero();
    w_co.setZero();
    b_i.setZero();
    b_c.setZero();
    b_o.setZero();
}

void LstmDirection::cell(const nn::Vector& x, const nn::Vector& h_prev, const nn::Vector& c_prev,
                         nn::Vector& h, nn::Vector& c) const {
    if (x.size() != in_ || h_prev.size() != hidden_ || c_prev.size() != hidden_)
        throw DomainError("lstm cell: shape mismatch");
    nn::Vector i = vsigmoid(w_xi * x + w_hi * h_prev + w_ci.col(0).cwiseProduct(c_prev) + b_i.col(0));
    nn::Vector g = vtanh(w_xc * x + w_hc * h_prev + b_c.col(0));
    c = (nn::Vector::Ones(hidden_) - i).cwiseProduct(c_prev) + i.cwiseProduct(g);
    nn::Vector o = vsigmoid(w_xo * x + w_ho * h_prev + w_co.col(0).cwiseProduct(c) + b_o.col(0));
    h = o.cwiseProduct(vtanh(c));
}

nn::Matrix LstmDirection::apply(const nn::Matrix& inputs) const {
    if (inputs.rows() < 1) throw DomainError("lstm: empty sequence");
    if (inputs.cols() != in_)
        throw DomainError("lstm: expected " + std::to_string(in_) + " input dims, got " +
                          std::to_string(inputs.cols()));
    nn::Matrix outputs(inputs.rows(), hidden_);
    nn::Vector h = nn::Vector::Zero(hidden_), c = nn::Vector::Zero(hidden_);
    for (Eigen::Index t = 0; t < inputs.rows(); t++) {
        nn::Vector x = inputs.row(t).transpose();
        nn::Vector h_next, c_next;
        cell(x, h, c, h_next, c_next);
        h = h_next;
        c = c_next;
        outputs.row(t) = h.transpose();
    }
    return outputs;
}

nn::Matrix LstmDirection::forward(const nn::Matrix& inputs) {
    if (inputs.rows() < 1) throw DomainError("lstm: empty sequence");
    if (inputs.cols() != in_)
        throw DomainError("lstm: expected " + std::to_string(in_) + " input dims, got " +
                          std::to_string(inputs.cols()));
    cache_.clear();
    cache_.reserve((size_t)inputs.rows());
    nn::Matrix outputs(inputs.rows(), hidden_);
    nn::Vector h = nn::Vector::Zero(hidden_), c = nn::Vector::Zero(hidden_);
    for (Eigen::Index t = 0; t < inputs.rows(); t++) {
        StepCache step;
        step.x = inputs.row(t).transpose();
        step.h_prev = h;
        step.c_prev = c;
        step.i = vsigmoid(w_xi * step.x + w_hi * h + w_ci.col(0).cwiseProduct(c) + b_i.col(0));
        step.g = vtanh(w_xc * step.x + w_hc * h + b_c.col(0));
        step.c = (nn::Vector::Ones(hidden_) - step.i).cwiseProduct(c) + step.i.cwiseProduct(step.g);
        step.o = vsigmoid(w_xo * step.x + w_ho * h + w_co.col(0).cwiseProduct(step.c) + b_o.col(0));
        step.tanh_c = vtanh(step.c);
        h = step.o.cwiseProduct(step.tanh_c);
        c = step.c;
        outputs.row(t) = h.transpose();
        cache_.push_back(std::move(step));
    }
    return outputs;
}

nn::Matrix LstmDirection::backward(const nn::Matrix& d_outputs) {
    if (cache_.empty()) throw DomainError("lstm: backward called before forward");
    if (d_outputs.rows() != (Eigen::Index)cache_.size() || d_outputs.cols() != hidden_)
        throw DomainError("lstm: gradient shape mismatch");

    nn::Matrix d_inputs(d_outputs.rows(), in_);
    nn::Vector dh_next = nn::Vector::Zero(hidden_), dc_next = nn::Vector::Zero(hidden_);
    for (Eigen::Index t = d_outputs.rows() - 1; t >= 0; t--) {
        const StepCache& s = cache_[(size_t)t];
        nn::Vector ones = nn::Vector::Ones(hidden_);

        nn::Vector dh = d_outputs.row(t).transpose() + dh_next;
        nn::Vector d_o = dh.cwiseProduct(s.tanh_c);
        nn::Vector da_o = d_o.cwiseProduct(s.o).cwiseProduct(ones - s.o);
        nn::Vector dc = dh.cwiseProduct(s.o)
                            .cwiseProduct(ones - s.tanh_c.cwiseProduct(s.tanh_c)) +
                        dc_next + da_o.cwiseProduct(w_co.col(0));
        nn::Vector di = dc.cwiseProduct(s.g - s.c_prev);
        nn::Vector da_i = di.cwiseProduct(s.i).cwiseProduct(ones - s.i);
        nn::Vector dg = dc.cwiseProduct(s.i);
        nn::Vector da_g = dg.cwiseProduct(ones - s.g.cwiseProduct(s.g));

        w_xi_g += da_i * s.x.transpose();
        w_hi_g += da_i * s.h_prev.transpose();
        w_ci_g += da_i.cwiseProduct(s.c_prev);
        b_i_g += da_i;
        w_xc_g += da_g * s.x.transpose();
        w_hc_g += da_g * s.h_prev.transpose();
        b_c_g += da_g;
        w_xo_g += da_o * s.x.transpose();
        w_ho_g += da_o * s.h_prev.transpose();
        w_co_g += da_o.cwiseProduct(s.c);
        b_o_g += da_o;

        d_inputs.row(t) =
            (w_xi.transpose() * da_i + w_xc.transpose() * da_g + w_xo.transpose() * da_o)
                .transpose();
        dh_next = w_hi.transpose() * da_i + w_hc.transpose() * da_g + w_ho.transpose() * da_o;
        dc_next = dc.cwiseProduct(ones - s.i) + da_i.cwiseProduct(w_ci.col(0));
    }
    return d_inputs;
}

void LstmDirection::zero_grad() {
    auto zero_like = [](const nn::Matrix& m) { return nn::Matrix::Zero(m.rows(), m.cols()); };
    w_xi_g = zero_like(w_xi);
    w_hi_g = zero_like(w_hi);
    w_ci_g = zero_like(w_ci);
    b_i_g = zero_like(b_i);
    w_xc_g = zero_like(w_xc);
    w_hc_g = zero_like(w_hc);
    b_c_g = zero_like(b_c);
    w_xo_g = zero_like(w_xo);
    w_ho_g = zero_like(w_ho);
    w_co_g = zero_like(w_co);
    b_o_g = zero_like(b_o);
}

void LstmDirection::collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) {
    auto add = [&](const char* name, nn::Matrix& value, nn::Matrix& grad) {
        std::vector<int> shape;
        if (value.cols() == 1)
            shape = {(int)value.rows()};
        else
            shape = {(int)value.rows(), (int)value.cols()};
        out.push_back({prefix + "." + name, &value, &grad, shape});
    };
    add("w_xi", w_xi, w_xi_g);
    add("w_hi", w_hi, w_hi_g);
    add("w_ci", w_ci, w_ci_g);
    add("b_i", b_i, b_i_g);
    add("w_xc", w_xc, w_xc_g);
    add("w_hc", w_hc, w_hc_g);
    add("b_c", b_c, b_c_g);
    add("w_xo", w_xo, w_xo_g);
    add("w_ho", w_ho, w_ho_g);
    add("w_co", w_co, w_co_g);
    add("b_o", b_o, b_o_g);
}

double Crf::masked_transition(int from, int to) const {
    double mask = (from == kTagO && to == kTagI) ? kCrfMask : 0.0;
    return transition(from, to) + mask;
}

double Crf::masked_start(int tag) const {
    return start(tag, 0) + (tag == kTagI ? kCrfMask : 0.0);
}

void Crf::zero_grad() {
    transition_grad.setZero();
    start_grad.setZero();
    stop_grad.setZero();
}

void Crf::collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) {
    out.push_back({prefix + ".transition", &transition, &transition_grad, {kNumTags, kNumTags}});
    out.push_back({prefix + ".start", &start, &start_grad, {kNumTags}});
    out.push_back({prefix + ".stop", &stop, &stop_grad, {kNumTags}});
}

namespace {

void check_emissions(const nn::Matrix& emissions) {
    if (emissions.rows() < 1) throw DomainError("crf: empty emission sequence");
    if (emissions.cols() != kNumTags)
        throw DomainError("crf: expected " + std::to_string(kNumTags) + " tag scores, got " +
                          std::to_string(emissions.cols()));
}

void check_tags(const std::vector<int>& tags, Eigen::Index rows) {
    if ((Eigen::Index)tags.size() != rows)
        throw DomainError("crf: tag/emission length mismatch");
    for (int t : tags)
        if (t < 0 || t >= kNumTags)
            throw DomainError("crf: tag id out of range: " + std::to_string(t));
}

} // namespace

double crf_path_score(const nn::Matrix& emissions, const std::vector<int>& tags, const Crf& crf) {
    check_emissions(emissions);
    check_tags(tags, emissions.rows());
    double score = crf.masked_start(tags[0]) + emissions(0, tags[0]);
    for (size_t t = 1; t < tags.size(); t++)
        score += crf.masked_transition(tags[t - 1], tags[t]) + emissions((Eigen::Index)t, tags[t]);
    return score + crf.stop(tags.back(), 0);
}

double crf_log_partition(const nn::Matrix& emissions, const Crf& crf) {
    check_emissions(emissions);
    double alpha[kNumTags], next[kNumTags];
    for (int j = 0; j < kNumTags; j++) alpha[j] = crf.masked_start(j) + emissions(0, j);
    for (Eigen::Index t = 1; t < emissions.rows(); t++) {
        for (int j = 0; j < kNumTags; j++) {
            double terms[kNumTags];
            for (int i = 0; i < kNumTags; i++) terms[i] = alpha[i] + crf.masked_transition(i, j);
            next[j] = logsumexp3(terms) + emissions(t, j);
        }
        std::copy(next, next + kNumTags, alpha);
    }
    double finals[kNumTags];
    for (int j = 0; j < kNumTags; j++) finals[j] = alpha[j] + crf.stop(j, 0);
    return logsumexp3(finals);
}

double crf_log_likelihood(const nn::Matrix& emissions, const std::vector<int>& tags,
                          const Crf& crf) {
    return crf_path_score(emissions, tags, crf) - crf_log_partition(emissions, crf);
}

double crf_nll_backward(const nn::Matrix& emissions, const std::vector<int>& tags, Crf& crf,
                        nn::Matrix& d_emissions) {
    check_emissions(emissions);
    check_tags(tags, emissions.rows());
    Eigen::Index n = emissions.rows();

    nn::Matrix alpha(n, kNumTags), beta(n, kNumTags);
    for (int j = 0; j < kNumTags; j++) alpha(0, j) = crf.masked_start(j) + emissions(0, j);
    for (Eigen::Index t = 1; t < n; t++)
        for (int j = 0; j < kNumTags; j++) {
            double terms[kNumTags];
            for (int i = 0; i < kNumTags; i++)
                terms[i] = alpha(t - 1, i) + crf.masked_transition(i, j);
            alpha(t, j) = logsumexp3(terms) + emissions(t, j);
        }
    for (int i = 0; i < kNumTags; i++) beta(n - 1, i) = crf.stop(i, 0);
    for (Eigen::Index t = n - 2; t >= 0; t--)
        for (int i = 0; i < kNumTags; i++) {
            double terms[kNumTags];
            for (int j = 0; j < kNumTags; j++)
                terms[j] = crf.masked_transition(i, j) + emissions(t + 1, j) + beta(t + 1, j);
            beta(t, i) = logsumexp3(terms);
        }
    double finals[kNumTags];
    for (int j = 0; j < kNumTags; j++) finals[j] = alpha(n - 1, j) + crf.stop(j, 0);
    double log_z = logsumexp3(finals);

    // unary marginals drive the emission/start/stop gradients
    d_emissions = nn::Matrix::Zero(n, kNumTags);
    for (Eigen::Index t = 0; t < n; t++)
        for (int j = 0; j < kNumTags; j++)
            d_emissions(t, j) = std::exp(alpha(t, j) + beta(t, j) - log_z);
    for (int j = 0; j < kNumTags; j++) {
        crf.start_grad(j, 0) += d_emissions(0, j);
        crf.stop_grad(j, 0) += d_emissions(n - 1, j);
    }
    crf.start_grad(tags[0], 0) -= 1.0;
    crf.stop_grad(tags.back(), 0) -= 1.0;

    // pairwise marginals for the transition gradient
    for (Eigen::Index t = 0; t + 1 < n; t++) {
        for (int i = 0; i < kNumTags; i++)
            for (int j = 0; j < kNumTags; j++)
                crf.transition_grad(i, j) +=
                    std::exp(alpha(t, i) + crf.masked_transition(i, j) + emissions(t + 1, j) +
                             beta(t + 1, j) - log_z);
        crf.transition_grad(tags[(size_t)t], tags[(size_t)t + 1]) -= 1.0;
    }

    for (Eigen::Index t = 0; t < n; t++) d_emissions(t, tags[(size_t)t]) -= 1.0;

    return log_z - crf_path_score(emissions, tags, crf);
}

std::pair<std::vector<int>, double> viterbi_decode(const nn::Matrix& emissions, const Crf& crf) {
    check_emissions(emissions);
    Eigen::Index n = emissions.rows();
    nn::Matrix delta(n, kNumTags);
    std::vector<std::array<int, kNumTags>> psi((size_t)n);

    for (int j = 0; j < kNumTags; j++) delta(0, j) = crf.masked_start(j) + emissions(0, j);
    for (Eigen::Index t = 1; t < n; t++)
        for (int j = 0; j < kNumTags; j++) {
            int best_i = 0;
            double best = delta(t - 1, 0) + crf.masked_transition(0, j);
            for (int i = 1; i < kNumTags; i++) {
                double s = delta(t - 1, i) + crf.masked_transition(i, j);
                if (s > best) { // ties keep the lower tag index
                    best = s;
                    best_i = i;
                }
            }
            delta(t, j) = best + emissions(t, j);
            psi[(size_t)t][j] = best_i;
        }

    int last = 0;
    double best = delta(n - 1, 0) + crf.stop(0, 0);
    for (int j = 1; j < kNumTags; j++) {
        double s = delta(n - 1, j) + crf.stop(j, 0);
        if (s > best) {
            best = s;
            last = j;
        }
    }
    std::vector<int> tags((size_t)n);
    tags[(size_t)n - 1] = last;
    for (Eigen::Index t = n - 1; t > 0; t--)
        tags[(size_t)t - 1] = psi[(size_t)t][tags[(size_t)t]];
    return {tags, best};
}

LstmCrfTagger::LstmCrfTagger(const LstmCrfConfig& config, EmbeddingTable table)
    : config_(config), table_(std::move(table)) {
    if (config_.dim < 1 || config_.hidden < 1)
        throw DomainError("lstm-crf config: dimensions must be positive");
    if (table_.dim != 0 && table_.dim != config_.dim)
        throw DomainError("lstm-crf: embedding dimension " + std::to_string(table_.dim) +
                          " does not match configured " + std::to_string(config_.dim));
    oov_ = nn::Matrix::Zero(config_.dim, 1);
    oov_grad_ = nn::Matrix::Zero(config_.dim, 1);
    fwd_ = LstmDirection(config_.dim, config_.hidden);
    bwd_ = LstmDirection(config_.dim, config_.hidden);
    proj_ = nn::Dense(2 * config_.hidden, kNumTags);
}

void LstmCrfTagger::init(nn::Rng& rng) {
    double bound = std::sqrt(6.0 / (double)(config_.dim + config_.hidden));
    for (Eigen::Index k = 0; k < oov_.rows(); k++) oov_(k, 0) = rng.uniform(-bound, bound);
    fwd_.init_glorot(rng);
    bwd_.init_glorot(rng);
    proj_.init_glorot(rng);
    crf_.transition.setZero();
    crf_.start.setZero();
    crf_.stop.setZero();
}

nn::Matrix LstmCrfTagger::embed(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) throw DomainError("lstm-crf: empty query");
    nn::Matrix x((Eigen::Index)tokens.size(), config_.dim);
    for (size_t t = 0; t < tokens.size(); t++) {
        auto it = table_.vectors.find(tokens[t]);
        if (it != table_.vectors.end())
            x.row((Eigen::Index)t) = it->second.transpose();
        else
            x.row((Eigen::Index)t) = oov_.col(0).transpose();
    }
    return x;
}

nn::Matrix LstmCrfTagger::emissions(const std::vector<std::string>& tokens) const {
    nn::Matrix x = embed(tokens);
    nn::Matrix fwd_out = fwd_.apply(x);
    nn::Matrix bwd_out = bwd_.apply(x.colwise().reverse()).colwise().reverse();
    nn::Matrix concat(x.rows(), 2 * config_.hidden);
    concat << fwd_out, bwd_out;
    return proj_.apply(concat);
}

std::pair<std::vector<int>, double> LstmCrfTagger::decode(
    const std::vector<std::string>& tokens) const {
    return viterbi_decode(emissions(tokens), crf_);
}

double LstmCrfTagger::loss(const IobSequence& sequence) const {
    return -crf_log_likelihood(emissions(sequence.tokens), sequence.tags, crf_);
}

double LstmCrfTagger::accumulate_gradients(const IobSequence& sequence) {
    const auto& tokens = sequence.tokens;
    if (tokens.size() != sequence.tags.size())
        throw DomainError("lstm-crf: token/tag length mismatch");

    nn::Matrix x = embed(tokens);
    cached_oov_mask_.assign(tokens.size(), 0);
    for (size_t t = 0; t < tokens.size(); t++)
        if (!table_.vectors.count(tokens[t])) cached_oov_mask_[t] = 1;

    nn::Matrix fwd_out = fwd_.forward(x);
    nn::Matrix bwd_out_rev = bwd_.forward(x.colwise().reverse());
    nn::Matrix bwd_out = bwd_out_rev.colwise().reverse();
    nn::Matrix concat(x.rows(), 2 * config_.hidden);
    concat << fwd_out, bwd_out;
    nn::Matrix em = proj_.forward(concat);

    nn::Matrix d_em;
    double nll = crf_nll_backward(em, sequence.tags, crf_, d_em);

    nn::Matrix d_concat = proj_.backward(d_em);
    nn::Matrix dx = fwd_.backward(d_concat.leftCols(config_.hidden));
    nn::Matrix dx_rev = bwd_.backward(d_concat.rightCols(config_.hidden).colwise().reverse());
    dx += dx_rev.colwise().reverse();

    for (size_t t = 0; t < tokens.size(); t++)
        if (cached_oov_mask_[t]) oov_grad_.col(0) += dx.row((Eigen::Index)t).transpose();

    return nll;
}

std::vector<nn::ParamRef> LstmCrfTagger::params() {
    std::vector<nn::ParamRef> out;
    out.push_back({"oov", &oov_, &oov_grad_, {config_.dim}});
    fwd_.collect_params("fwd", out);
    bwd_.collect_params("bwd", out);
    proj_.collect_params("proj", out);
    crf_.collect_params("crf", out);
    return out;
}

void LstmCrfTagger::zero_grads() {
    oov_grad_.setZero();
    fwd_.zero_grad();
    bwd_.zero_grad();
    proj_.zero_grad();
    crf_.zero_grad();
}

LstmCrfTrainResult train_lstm_crf(const std::vector<IobSequence>& data,
                                  const EmbeddingTable& table, const LstmCrfConfig& config) {
    if (data.empty()) throw DomainError("lstm-crf train: empty dataset");
    for (const auto& seq : data)
        if (!valid_iob(seq.tags) || seq.tokens.size() != seq.tags.size() || seq.tokens.empty())
            throw DomainError("lstm-crf train: invalid IOB sequence for query '" +
                              join_tokens(seq.tokens) + "'");

    LstmCrfTrainResult result{LstmCrfTagger(config, table), 0.0};
    nn::Rng rng(config.seed);
    result.model.init(rng);

    auto params = result.model.params();
    nn::AdamConfig adam_config;
    adam_config.lr = config.lr;
    nn::Adam adam(adam_config, params);

    for (int epoch = 0; epoch < config.epochs; epoch++) {
        double epoch_loss = 0;
        for (const auto& seq : data) {
            result.model.zero_grads();
            epoch_loss += result.model.accumulate_gradients(seq);
            adam.step(params);
        }
        result.final_loss = epoch_loss / (double)data.size();
    }
    return result;
}

CandidateList extract_lstm_crf_candidates(const LstmCrfTagger& model, const ClickGraph& graph) {
    std::map<std::string, int> freq;
    for (const auto& query : graph.queries) {
        if (query.tokens.empty()) continue;
        auto [tags, score] = model.decode(query.tokens);
        IobSequence tagged{query.tokens, tags, ""};
        std::set<std::string> spans;
        for (const auto& span : extract_product_spans(tagged)) spans.insert(span);
        for (const auto& span : spans) freq[span]++;
    }
    return rank_candidates(freq);
}

std::string lstm_crf_to_json(const LstmCrfTagger& model) {
    const LstmCrfConfig& c = model.config();
    json config;
    config["dim"] = c.dim;
    config["hidden"] = c.hidden;
    config["epochs"] = c.epochs;
    config["lr"] = c.lr;
    config["seed"] = c.seed;
    auto params = const_cast<LstmCrfTagger&>(model).params();
    return nn::checkpoint_to_json(config.dump(), params);
}

LstmCrfTagger lstm_crf_from_json(const std::string& text, EmbeddingTable table) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("lstm-crf checkpoint: ") + e.what());
    }
    if (!j.contains("config")) throw ParseError("lstm-crf checkpoint: missing 'config'");
    LstmCrfConfig c;
    try {
        const json& jc = j["config"];
        c.dim = jc.at("dim").get<int>();
        c.hidden = jc.at("hidden").get<int>();
        c.epochs = jc.at("epochs").get<int>();
        c.lr = jc.at("lr").get<double>();
        c.seed = jc.at("seed").get<uint64_t>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("lstm-crf checkpoint: bad config: ") + e.what());
    }
    LstmCrfTagger model(c, std::move(table));
    auto params = model.params();
    nn::checkpoint_from_json(text, params);
    return model;
}

LstmCrfTagger load_lstm_crf(const std::string& path, EmbeddingTable table) {
    return lstm_crf_from_json(read_file(path), std::move(table));
}

void save_lstm_crf(const LstmCrfTagger& model, const std::string& path) {
    write_file(path, lstm_crf_to_json(model));
}

} // namespace ontosearch
