// Command-line front end: one subcommand per pipeline stage, file-based
// handoffs between them. Diagnostics go to stderr; data goes to stdout or
// the path given by --out. Exit codes: 1 usage, 2 I/O, 3 validation,
// 4 data format.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ontosearch/annotator.hpp"
#include "ontosearch/candidates.hpp"
#include "ontosearch/click_graph.hpp"
#include "ontosearch/cnn_tagger.hpp"
#include "ontosearch/errors.hpp"
#include "ontosearch/eval.hpp"
#include "ontosearch/io.hpp"
#include "ontosearch/lstm_crf.hpp"
#include "ontosearch/ontology.hpp"
#include "ontosearch/retrieval.hpp"
#include "ontosearch/synth.hpp"
#include "ontosearch/token_graph.hpp"

namespace {

using namespace ontosearch;

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitFormat = 4;

/// Everything one invocation reads or writes, resolved from flags before
/// the stage runs so a bad path fails fast instead of mid-pipeline.
struct PipelineConfig {
    std::vector<std::string> inputs;

    void require_inputs() const {
        for (const auto& path : inputs)
            if (!std::filesystem::exists(path))
                throw IoError("no such file: " + path);
    }
};

/// Writes `text` to `out` when given, else to stdout.
void emit(const std::string& text, const std::string& out) {
    if (out.empty())
        std::cout << text;
    else
        write_file(out, text);
}

int run(CLI::App& app, int argc, char** argv) {
    std::string log_path;
    std::string graph_path;
    std::string config_path;
    std::string out_path;
    std::string model_path;
    std::string pos_path;
    std::string embeddings_path;
    std::string data_path;
    std::string ontology_path;
    std::string catalog_path;
    std::string index_path;
    std::string candidates_path;
    std::string annotations_path;
    std::string query;
    std::vector<std::string> curve_specs;
    std::string validate_path;
    bool default_product = false;
    int k = 10;
    int max_n = 500;
    double threshold = -1.0;
    ScoreWeights weights;
    CnnConfig cnn_config;
    LstmCrfConfig lstm_config;
    lstm_config.dim = 0; // 0 = take the dimension from the embedding file

    app.require_subcommand(1);

    auto* ingest_cmd = app.add_subcommand("ingest", "Aggregate a click-log TSV into a bipartite graph");
    ingest_cmd->add_option("--log", log_path, "click log TSV")->required();
    ingest_cmd->add_option("--out", out_path, "output graph JSON")->required();

    auto* clean_cmd = app.add_subcommand("clean", "Apply threshold/entropy/brand cleaning to a graph");
    clean_cmd->add_option("--graph", graph_path, "input graph JSON")->required();
    clean_cmd->add_option("--config", config_path, "cleaning config JSON")->required();
    clean_cmd->add_option("--out", out_path, "output graph JSON")->required();

    auto* extract_cmd = app.add_subcommand("extract", "Extract product-class candidates from a cleaned graph");
    extract_cmd->require_subcommand(1);
    auto* ex_tg = extract_cmd->add_subcommand("token-graph", "directed token-graph heuristic");
    ex_tg->add_option("--graph", graph_path, "cleaned graph JSON")->required();
    ex_tg->add_option("--config", config_path, "cleaning config JSON (for prepositions)");
    ex_tg->add_option("--out", out_path, "candidates CSV (default stdout)");
    auto* ex_cnn = extract_cmd->add_subcommand("cnn", "convolutional tagger over token+graph features");
    ex_cnn->add_option("--graph", graph_path, "cleaned graph JSON")->required();
    ex_cnn->add_option("--model", model_path, "trained checkpoint JSON")->required();
    ex_cnn->add_option("--pos", pos_path, "part-of-speech table TSV")->required();
    ex_cnn->add_option("--threshold", threshold, "probability cutoff (default: from checkpoint)");
    ex_cnn->add_option("--out", out_path, "candidates CSV (default stdout)");
    auto* ex_lstm = extract_cmd->add_subcommand("lstm-crf", "recurrent span tagger");
    ex_lstm->add_option("--graph", graph_path, "cleaned graph JSON")->required();
    ex_lstm->add_option("--model", model_path, "trained checkpoint JSON")->required();
    ex_lstm->add_option("--embeddings", embeddings_path, "word embeddings text file")->required();
    ex_lstm->add_option("--out", out_path, "candidates CSV (default stdout)");

    auto* train_cmd = app.add_subcommand("train", "Train a tagger and write its checkpoint");
    train_cmd->require_subcommand(1);
    auto* tr_cnn = train_cmd->add_subcommand("cnn", "convolutional tagger");
    tr_cnn->add_option("--data", data_path, "labeled queries TSV")->required();
    tr_cnn->add_option("--pos", pos_path, "part-of-speech table TSV")->required();
    tr_cnn->add_option("--graph", graph_path, "cleaned graph JSON")->required();
    tr_cnn->add_option("--out", out_path, "checkpoint JSON")->required();
    tr_cnn->add_option("--seed", cnn_config.seed, "RNG seed");
    tr_cnn->add_option("--epochs", cnn_config.epochs, "training epochs");
    tr_cnn->add_option("--lr", cnn_config.lr, "learning rate");
    tr_cnn->add_option("--threshold", cnn_config.threshold, "candidate probability cutoff");
    auto* tr_lstm = train_cmd->add_subcommand("lstm-crf", "recurrent span tagger");
    tr_lstm->add_option("--data", data_path, "IOB-tagged queries")->required();
    tr_lstm->add_option("--embeddings", embeddings_path, "word embeddings text file")->required();
    tr_lstm->add_option("--out", out_path, "checkpoint JSON")->required();
    tr_lstm->add_option("--seed", lstm_config.seed, "RNG seed");
    tr_lstm->add_option("--epochs", lstm_config.epochs, "training epochs");
    tr_lstm->add_option("--lr", lstm_config.lr, "learning rate");
    tr_lstm->add_option("--hidden", lstm_config.hidden, "hidden units per direction");

    auto* annotate_cmd = app.add_subcommand("annotate", "Label a query against an ontology; JSON to stdout");
    annotate_cmd->add_option("--ontology", ontology_path, "ontology JSON")->required();
    annotate_cmd->add_option("--query", query, "query text")->required();
    auto* ann_model = annotate_cmd->add_option("--model", model_path, "span-tagger checkpoint for gap filling");
    auto* ann_emb = annotate_cmd->add_option("--embeddings", embeddings_path, "embeddings for the span tagger");
    ann_model->needs(ann_emb);
    ann_emb->needs(ann_model);
    annotate_cmd->add_flag("--default-product", default_product,
                           "inject a brand's default product when none resolved");
    annotate_cmd->add_option("--out", out_path, "annotation JSON (default stdout)");

    auto* index_cmd = app.add_subcommand("index", "Validate a catalog against an ontology and build the index");
    index_cmd->add_option("--catalog", catalog_path, "SKU catalog JSON lines")->required();
    index_cmd->add_option("--ontology", ontology_path, "ontology JSON")->required();
    index_cmd->add_option("--out", out_path, "index JSON")->required();

    auto* search_cmd = app.add_subcommand("search", "Filter-and-boost retrieval; CSV to stdout");
    search_cmd->add_option("--index", index_path, "index JSON")->required();
    search_cmd->add_option("--query", query, "query text")->required();
    search_cmd->add_option("-k,--k", k, "results to return")->capture_default_str();
    search_cmd->add_option("--w-attr", weights.w_attr, "attribute match weight")->capture_default_str();
    search_cmd->add_option("--w-primary", weights.w_primary, "primary attribute weight")->capture_default_str();
    search_cmd->add_option("--w-brand", weights.w_brand, "brand match weight")->capture_default_str();
    search_cmd->add_option("--w-numeric", weights.w_numeric, "numeric proximity weight")->capture_default_str();
    search_cmd->add_option("--out", out_path, "results CSV (default stdout)");

    auto* eval_cmd = app.add_subcommand("eval", "Score candidate lists against P/N annotations");
    eval_cmd->require_subcommand(1);
    auto* ev_prec = eval_cmd->add_subcommand("precision", "precision@n curve for one candidate list");
    ev_prec->add_option("--candidates", candidates_path, "candidates CSV")->required();
    ev_prec->add_option("--annotations", annotations_path, "annotations CSV")->required();
    ev_prec->add_option("--max-n", max_n, "largest n")->capture_default_str();
    ev_prec->add_option("--out", out_path, "curve CSV (default stdout)");
    auto* ev_cmp = eval_cmd->add_subcommand("compare", "aligned report over several candidate lists");
    ev_cmp->add_option("--annotations", annotations_path, "annotations CSV")->required();
    ev_cmp->add_option("--max-n", max_n, "largest n")->capture_default_str();
    ev_cmp->add_option("--out", out_path, "report CSV (default stdout)");
    ev_cmp->add_option("curves", curve_specs, "NAME=CANDIDATES.csv, one per method")
        ->required()
        ->expected(-1);

    auto* synth_cmd = app.add_subcommand("synth", "Synthetic corpus tools");
    synth_cmd->require_subcommand(1);
    auto* sy_gen = synth_cmd->add_subcommand("gen", "generate a planted-ontology corpus");
    sy_gen->add_option("--config", config_path, "generator config JSON (default: built-in)");
    sy_gen->add_option("--out", out_path, "output directory")->required();

    auto* onto_cmd = app.add_subcommand("ontology", "Ontology file tools");
    onto_cmd->require_subcommand(1);
    auto* on_val = onto_cmd->add_subcommand("validate", "check structural rules; violations to stderr");
    on_val->add_option("file", validate_path, "ontology JSON")->required();

    app.parse(argc, argv);

    PipelineConfig pipeline;
    for (const auto& path : {log_path, graph_path, config_path, model_path, pos_path,
                             embeddings_path, data_path, ontology_path, catalog_path,
                             index_path, candidates_path, annotations_path, validate_path})
        if (!path.empty()) pipeline.inputs.push_back(path);
    for (const auto& spec : curve_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
            throw CLI::ValidationError("curves", "expected NAME=FILE, got '" + spec + "'");
        pipeline.inputs.push_back(spec.substr(eq + 1));
    }
    pipeline.require_inputs();

    if (*ingest_cmd) {
        save_click_graph(ingest_tsv(log_path), out_path);
    } else if (*clean_cmd) {
        save_click_graph(clean(load_click_graph(graph_path), load_clean_config(config_path)),
                         out_path);
    } else if (*ex_tg) {
        CleanConfig cfg;
        if (!config_path.empty()) cfg = load_clean_config(config_path);
        emit(candidates_to_csv(extract_token_graph_candidates(load_click_graph(graph_path), cfg)),
             out_path);
    } else if (*ex_cnn) {
        emit(candidates_to_csv(extract_cnn_candidates(load_cnn(model_path),
                                                      load_pos_table(pos_path),
                                                      load_click_graph(graph_path), threshold)),
             out_path);
    } else if (*ex_lstm) {
        emit(candidates_to_csv(extract_lstm_crf_candidates(
                 load_lstm_crf(model_path, load_embeddings(embeddings_path)),
                 load_click_graph(graph_path))),
             out_path);
    } else if (*tr_cnn) {
        auto result = train_cnn(load_labeled_queries(data_path), load_pos_table(pos_path),
                                load_click_graph(graph_path), cnn_config);
        save_cnn(result.model, out_path);
        std::fprintf(stderr, "final loss %.6f\n", result.final_loss);
    } else if (*tr_lstm) {
        EmbeddingTable table = load_embeddings(embeddings_path);
        if (lstm_config.dim == 0) lstm_config.dim = table.dim;
        auto result = train_lstm_crf(load_iob(data_path), table, lstm_config);
        save_lstm_crf(result.model, out_path);
        std::fprintf(stderr, "final loss %.6f\n", result.final_loss);
    } else if (*annotate_cmd) {
        Ontology ontology = load_ontology(ontology_path);
        QueryAnnotation annotation;
        if (model_path.empty()) {
            annotation = annotate(query, ontology);
        } else {
            LstmCrfTagger model = load_lstm_crf(model_path, load_embeddings(embeddings_path));
            annotation = annotate(query, ontology, &model);
        }
        if (default_product) annotation = apply_default_product(annotation, ontology);
        emit(annotation_to_json(annotation), out_path);
    } else if (*index_cmd) {
        save_index(index_skus(load_catalog(catalog_path), load_ontology(ontology_path)), out_path);
    } else if (*search_cmd) {
        SkuIndex index = load_index(index_path);
        QueryAnnotation annotation =
            apply_default_product(annotate(query, index.ontology), index.ontology);
        emit(results_to_csv(search(annotation, index, weights, k)), out_path);
    } else if (*ev_prec) {
        emit(curve_to_csv(precision_at_n(load_candidates(candidates_path),
                                         load_annotations(annotations_path), max_n)),
             out_path);
    } else if (*ev_cmp) {
        AnnotationSet annotations = load_annotations(annotations_path);
        std::vector<std::string> names;
        std::vector<PrecisionCurve> curves;
        for (const auto& spec : curve_specs) {
            auto eq = spec.find('=');
            names.push_back(spec.substr(0, eq));
            curves.push_back(
                precision_at_n(load_candidates(spec.substr(eq + 1)), annotations, max_n));
        }
        emit(compare_report(names, curves), out_path);
    } else if (*sy_gen) {
        GeneratorConfig config;
        if (!config_path.empty()) config = load_generator_config(config_path);
        write_synth(generate(config), out_path);
    } else if (*on_val) {
        // The loader rejects invalid files with every violation listed, so a
        // clean return already certifies the structural rules.
        load_ontology(validate_path);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ontology learning and retrieval toolkit for e-commerce search"};
    try {
        return run(app, argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e); // prints help or the parse error itself
        return code == 0 ? 0 : kExitUsage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFormat;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}
