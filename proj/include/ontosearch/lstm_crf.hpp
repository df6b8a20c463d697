#ifndef ONTOSEARCH_LSTM_CRF_HPP
#define ONTOSEARCH_LSTM_CRF_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ontosearch/candidates.hpp"
#include "ontosearch/click_graph.hpp"
#include "ontosearch/nn.hpp"

namespace ontosearch {

// IOB product tags
inline constexpr int kTagO = 0;
inline constexpr int kTagB = 1;
inline constexpr int kTagI = 2;
inline constexpr int kNumTags = 3;

/// Additive mask for transitions the IOB scheme forbids (O -> I, start -> I).
inline constexpr double kCrfMask = -1e30;

std::string tag_name(int tag);
int tag_from_name(const std::string& name);

struct IobSequence {
    std::vector<std::string> tokens;
    std::vector<int> tags;
    std::string category;

    bool operator==(const IobSequence&) const = default;
};

/// True when I only follows B or I and all tags are in range.
bool valid_iob(const std::vector<int>& tags);

/// Maximal B I* runs joined with single spaces, in order of appearance.
/// Throws DomainError on invalid IOB input.
std::vector<std::string> extract_product_spans(const IobSequence& tagged);

/// CoNLL-style file: `token<TAB>tag` lines, blank line between queries.
std::vector<IobSequence> iob_from_text(const std::string& text);
std::string iob_to_text(const std::vector<IobSequence>& sequences);
std::vector<IobSequence> load_iob(const std::string& path);
void save_iob(const std::vector<IobSequence>& sequences, const std::string& path);

/// Frozen word vectors keyed by normalized+stemmed term. The trainable OOV
/// vector lives in the model, not here.
struct EmbeddingTable {
    int dim = 0;
    std::map<std::string, nn::Vector> vectors;
};

/// Text format: `term v1 v2 ... vD` per line; the first line fixes D. Terms
/// that collide after normalization keep their first row.
EmbeddingTable embeddings_from_text(const std::string& text);
std::string embeddings_to_text(const EmbeddingTable& table);
EmbeddingTable load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingTable& table, const std::string& path);

/// One direction of the recurrence, gates exactly as in the coupled
/// input/forget formulation: peepholes w_ci (on c_{t-1}) and w_co (on c_t)
/// act elementwise.
struct LstmDirection {
    LstmDirection() = default;
    LstmDirection(int input_dim, int hidden_dim);

    void init_glorot(nn::Rng& rng);

    /// Single step; exposed so the cell can be oracle-tested in isolation.
    void cell(const nn::Vector& x, const nn::Vector& h_prev, const nn::Vector& c_prev,
              nn::Vector& h, nn::Vector& c) const;

    nn::Matrix apply(const nn::Matrix& inputs) const;  // T x D -> T x H, pure
    nn::Matrix forward(const nn::Matrix& inputs);      // caches the whole run
    nn::Matrix backward(const nn::Matrix& d_outputs);  // returns T x D input grads
    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out);

    int input_dim() const { return in_; }
    int hidden_dim() const { return hidden_; }

    // input gate, cell candidate, output gate
    nn::Matrix w_xi, w_hi, w_ci, b_i;
    nn::Matrix w_xc, w_hc, b_c;
    nn::Matrix w_xo, w_ho, w_co, b_o;
    nn::Matrix w_xi_g, w_hi_g, w_ci_g, b_i_g;
    nn::Matrix w_xc_g, w_hc_g, b_c_g;
    nn::Matrix w_xo_g, w_ho_g, w_co_g, b_o_g;

private:
    struct StepCache {
        nn::Vector x, h_prev, c_prev, i, g, c, o, tanh_c;
    };
    int in_ = 0, hidden_ = 0;
    std::vector<StepCache> cache_;
};

/// Linear-chain CRF over the three IOB tags with trainable transition,
/// start and stop scores. Forbidden transitions are masked additively at
/// every use, so decoded paths always satisfy the IOB invariant.
struct Crf {
    nn::Matrix transition = nn::Matrix::Zero(kNumTags, kNumTags); // [from][to]
    nn::Matrix start = nn::Matrix::Zero(kNumTags, 1);
    nn::Matrix stop = nn::Matrix::Zero(kNumTags, 1);
    nn::Matrix transition_grad = nn::Matrix::Zero(kNumTags, kNumTags);
    nn::Matrix start_grad = nn::Matrix::Zero(kNumTags, 1);
    nn::Matrix stop_grad = nn::Matrix::Zero(kNumTags, 1);

    double masked_transition(int from, int to) const;
    double masked_start(int tag) const;

    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out);
};

/// Score of one specific path under the CRF (start + emissions + transitions
/// + stop), mask included.
double crf_path_score(const nn::Matrix& emissions, const std::vector<int>& tags, const Crf& crf);

/// log Z by the forward algorithm in log space.
double crf_log_partition(const nn::Matrix& emissions, const Crf& crf);

/// path score - log Z. Throws DomainError on empty input or bad tag ids.
double crf_log_likelihood(const nn::Matrix& emissions, const std::vector<int>& tags,
                          const Crf& crf);

/// Negative log-likelihood plus gradients: fills d_emissions and accumulates
/// the CRF parameter gradients via forward-backward marginals.
double crf_nll_backward(const nn::Matrix& emissions, const std::vector<int>& tags, Crf& crf,
                        nn::Matrix& d_emissions);

/// Best-scoring valid path; ties resolved toward the lower tag index.
std::pair<std::vector<int>, double> viterbi_decode(const nn::Matrix& emissions, const Crf& crf);

struct LstmCrfConfig {
    int dim = 32;    // embedding dimension D; raise to 300 at production scale
    int hidden = 32; // H per direction
    int epochs = 12;
    double lr = 1e-3;
    uint64_t seed = 1;
};

/// Bi-directional LSTM over frozen embeddings, dense projection to tag
/// emissions, CRF on top.
class LstmCrfTagger {
public:
    LstmCrfTagger() = default;
    LstmCrfTagger(const LstmCrfConfig& config, EmbeddingTable table);

    void init(nn::Rng& rng);

    /// T x D rows; unknown terms take the trainable OOV vector.
    nn::Matrix embed(const std::vector<std::string>& tokens) const;

    /// Pure forward to per-token tag scores (T x 3).
    nn::Matrix emissions(const std::vector<std::string>& tokens) const;

    /// Viterbi tags for a query.
    std::pair<std::vector<int>, double> decode(const std::vector<std::string>& tokens) const;

    /// Forward + backward for one labeled query; accumulates gradients and
    /// returns the negative log-likelihood.
    double accumulate_gradients(const IobSequence& sequence);

    /// Negative log-likelihood only (pure).
    double loss(const IobSequence& sequence) const;

    std::vector<nn::ParamRef> params();
    void zero_grads();

    const LstmCrfConfig& config() const { return config_; }
    const EmbeddingTable& embeddings() const { return table_; }
    const Crf& crf() const { return crf_; }

private:
    LstmCrfConfig config_;
    EmbeddingTable table_;
    nn::Matrix oov_, oov_grad_; // D x 1
    LstmDirection fwd_, bwd_;
    nn::Dense proj_; // 2H -> 3
    Crf crf_;
    std::vector<char> cached_oov_mask_; // which positions hit the OOV vector
};

struct LstmCrfTrainResult {
    LstmCrfTagger model;
    double final_loss = 0;
};

/// Gradient ascent on the CRF log-likelihood with per-query Adam updates,
/// deterministic for a fixed seed and data order.
LstmCrfTrainResult train_lstm_crf(const std::vector<IobSequence>& data,
                                  const EmbeddingTable& table, const LstmCrfConfig& config);

/// Decodes every query in the cleaned graph and aggregates product spans;
/// frequency counts contributing queries.
CandidateList extract_lstm_crf_candidates(const LstmCrfTagger& model, const ClickGraph& graph);

/// Checkpoint holds config + trainable parameters; embeddings stay external.
std::string lstm_crf_to_json(const LstmCrfTagger& model);
LstmCrfTagger lstm_crf_from_json(const std::string& text, EmbeddingTable table);
LstmCrfTagger load_lstm_crf(const std::string& path, EmbeddingTable table);
void save_lstm_crf(const LstmCrfTagger& model, const std::string& path);

} // namespace ontosearch

#endif
