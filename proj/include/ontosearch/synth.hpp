#ifndef ONTOSEARCH_SYNTH_HPP
#define ONTOSEARCH_SYNTH_HPP

/// Synthetic click-log corpus with planted product classes. The generator
/// plants a vocabulary of invented-but-stemmable words, assembles structured
/// queries around the planted products, mixes in the documented noise types,
/// and emits every artifact the extraction pipeline consumes: the raw click
/// log, cleaning config, tagger training data, POS table, embeddings, a seed
/// ontology, and a ground-truth product/not-product annotation set.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ontosearch/click_graph.hpp"
#include "ontosearch/cnn_tagger.hpp"
#include "ontosearch/eval.hpp"
#include "ontosearch/lstm_crf.hpp"
#include "ontosearch/ontology.hpp"

namespace ontosearch {

struct GeneratorConfig {
    std::uint64_t seed = 1;
    int products = 50;
    int attributes = 24;
    int brands = 12;
    int categories = 7;
    int queries = 5000;
    int skus_per_product = 3;
    double product_final_prob = 0.85;   // P(product last after tail truncation)
    double preposition_tail_prob = 0.2; // P(query ends "prep tailword")
    double noise_rate = 0.1;
    int test_categories = 1; // held out from tagger training data
    int embedding_dim = 32;

    bool operator==(const GeneratorConfig&) const = default;
};

GeneratorConfig generator_config_from_json(const std::string& text);
std::string generator_config_to_json(const GeneratorConfig& config);
GeneratorConfig load_generator_config(const std::string& path);

struct SynthProduct {
    std::vector<std::string> words; // 1 or 2 tokens, already stem-stable
    std::string category;

    const std::string& head() const { return words.back(); }
    std::string phrase() const;

    bool operator==(const SynthProduct&) const = default;
};

struct SynthData {
    GeneratorConfig config;
    std::vector<SynthProduct> products;
    std::vector<std::string> categories;
    std::vector<std::string> test_category_names;
    std::vector<ClickRecord> click_log;
    AnnotationSet ground_truth; // covers every vocabulary token
    std::map<std::string, std::vector<IobSequence>> iob_by_category;
    std::vector<LabeledQuery> cnn_queries;
    PosTable pos_table;
    EmbeddingTable embeddings;
    Ontology ontology;
    CleanConfig clean_config;
};

/// Deterministic in the config (single seeded RNG, fixed draw order).
/// Throws DomainError on out-of-range config values.
SynthData generate(const GeneratorConfig& config);

/// Writes click_log.tsv, ground_truth.csv, iob_<category>.txt,
/// cnn_queries.tsv, pos_table.tsv, embeddings.txt, ontology.json,
/// clean_config.json, manifest.json, and config.json under `dir`
/// (created if missing). Byte-deterministic for a given SynthData.
void write_synth(const SynthData& data, const std::string& dir);

} // namespace ontosearch

#endif
