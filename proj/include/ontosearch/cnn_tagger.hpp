#ifndef ONTOSEARCH_CNN_TAGGER_HPP
#define ONTOSEARCH_CNN_TAGGER_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ontosearch/candidates.hpp"
#include "ontosearch/click_graph.hpp"
#include "ontosearch/nn.hpp"
#include "ontosearch/token_graph.hpp"

namespace ontosearch {

// Universal POS tagset; index 11 (X) doubles as the out-of-vocabulary bucket.
inline constexpr int kPosTags = 12;
extern const std::array<const char*, kPosTags> kPosTagNames;

/// Index of a tag name in kPosTagNames. Throws ParseError on unknown tags.
int pos_tag_index(const std::string& tag);

/// term -> distribution over the 12 universal POS tags, built offline from
/// SKU descriptions. Keys are normalized+stemmed like query tokens.
struct PosTable {
    std::map<std::string, std::array<double, kPosTags>> rows;
};

/// Table row, or all mass on X for out-of-vocabulary terms.
std::array<double, kPosTags> pos_vector(const PosTable& table, const std::string& term);

/// TSV `term\ttag:prob[,tag:prob...]`; probabilities must be >= 0 and sum
/// to 1 within 1e-9 per row.
PosTable pos_table_from_tsv(const std::string& text);
std::string pos_table_to_tsv(const PosTable& table);
PosTable load_pos_table(const std::string& path);
void save_pos_table(const PosTable& table, const std::string& path);

/// [n_i, n_o, n_i/(n_i+n_o)] for the token in its component's graph.
/// Throws DomainError when the token is absent.
std::array<double, 3> graph_vector(const TokenGraph& graph, const std::string& token);

/// v_n = N - i for the i-th token (1-based) of an N-token query.
double position_value(int i, int n);

/// Per-token features padded/truncated to a fixed length: 12 POS fractions,
/// 3 graph numbers, 1 position value per row.
struct FeatureSequence {
    nn::Matrix features;    // max_len x 16
    std::vector<char> mask; // 1 for real tokens, 0 for padding
    int real_len = 0;       // min(#tokens, max_len)
};

inline constexpr int kCnnFeatureDim = kPosTags + 3 + 1;

/// Builds the concatenated (v_p, v_g, v_n) rows for a query. Single-token
/// queries take v_g = [1, 1, 0.5]; otherwise every token must appear in
/// the supplied component token graph.
FeatureSequence featurize(const std::vector<std::string>& tokens, const PosTable& pos,
                          const TokenGraph& graph, int max_len);

struct CnnConfig {
    std::array<int, 3> widths{7, 5, 3};
    int filters = 32;   // per layer; raise to 256 at production scale
    int max_len = 16;   // L
    int hidden = 32;    // time-distributed dense width
    int epochs = 8;
    double lr = 1e-3;
    double threshold = 0.5; // candidate probability cutoff
    uint64_t seed = 1;
};

struct LabeledQuery {
    std::string category;
    std::vector<std::string> tokens;
    std::vector<int> labels; // 1 = product token

    bool operator==(const LabeledQuery&) const = default;
};

/// TSV `category\ttoken token ...\tlabel label ...` with labels in {0,1}.
std::vector<LabeledQuery> labeled_queries_from_tsv(const std::string& text);
std::string labeled_queries_to_tsv(const std::vector<LabeledQuery>& queries);
std::vector<LabeledQuery> load_labeled_queries(const std::string& path);
void save_labeled_queries(const std::vector<LabeledQuery>& queries, const std::string& path);

/// Three same-padded conv layers (widths 7/5/3), a time-distributed hidden
/// dense, and a per-token sigmoid head. Masked rows are zeroed between
/// layers so padding content can never leak into real positions.
class CnnTagger {
public:
    CnnTagger() = default;
    explicit CnnTagger(const CnnConfig& config);

    void init(nn::Rng& rng);

    /// Per-real-token product probabilities (padding omitted).
    std::vector<double> predict(const FeatureSequence& input) const;

    /// Masked mean binary cross-entropy, forward only.
    double loss(const FeatureSequence& input, const std::vector<int>& labels) const;

    /// Forward + backward; accumulates parameter gradients, returns the loss.
    double accumulate_gradients(const FeatureSequence& input, const std::vector<int>& labels);

    std::vector<nn::ParamRef> params();
    void zero_grads();

    const CnnConfig& config() const { return config_; }

private:
    nn::Matrix probabilities(const nn::Matrix& features, const std::vector<char>& mask) const;

    CnnConfig config_;
    nn::Conv1d conv1_, conv2_, conv3_;
    nn::Dense hidden_, out_;
};

/// Token graph of each connected component, built from untruncated queries
/// so that every query token has graph features, plus a query-id -> graph
/// index map.
struct ComponentGraphs {
    std::vector<TokenGraph> graphs;
    std::vector<int> graph_of_query; // -1 for isolated queries
};

ComponentGraphs build_component_graphs(const ClickGraph& graph);

struct CnnTrainResult {
    CnnTagger model;
    double final_loss = 0;
};

/// Deterministic full-pass training with per-query Adam updates. Labeled
/// queries are matched to G' components by their normalized token join;
/// unmatched queries fall back to their own chain graph.
CnnTrainResult train_cnn(const std::vector<LabeledQuery>& data, const PosTable& pos,
                         const ClickGraph& graph, const CnnConfig& config);

/// Runs the tagger over every query of the cleaned graph; a token becomes a
/// candidate when its probability reaches the threshold; frequency counts
/// contributing queries. Pass threshold < 0 to use the model's configured one.
CandidateList extract_cnn_candidates(const CnnTagger& model, const PosTable& pos,
                                     const ClickGraph& graph, double threshold = -1.0);

std::string cnn_to_json(const CnnTagger& model);
CnnTagger cnn_from_json(const std::string& text);
CnnTagger load_cnn(const std::string& path);
void save_cnn(const CnnTagger& model, const std::string& path);

} // namespace ontosearch

#endif
