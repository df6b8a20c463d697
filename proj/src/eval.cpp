#include "ontosearch/eval.hpp"

#include <algorithm>

#include "ontosearch/errors.hpp"
#include "ontosearch/io.hpp"
#include "ontosearch/ontology.hpp"
#include "ontosearch/text.hpp"

namespace ontosearch {

std::string to_string(PnLabel label) {
    return label == PnLabel::P ? "P" : "N";
}

PnLabel pn_label_from_string(const std::string& s) {
    if (s == "P") return PnLabel::P;
    if (s == "N") return PnLabel::N;
    throw ParseError("label must be P or N, got '" + s + "'");
}

AnnotationSet annotations_from_csv(const std::string& text) {
    AnnotationSet out;
    size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        std::string line = text.substr(start, end == std::string::npos ? end : end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        line_no++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string where = "annotations: line " + std::to_string(line_no);
        if (line_no == 1) {
            if (line != "term,label") throw ParseError(where + ": expected header 'term,label'");
            continue;
        }
        size_t comma = line.rfind(',');
        if (comma == std::string::npos) throw ParseError(where + ": expected term,label");
        std::string term = normalize_phrase(line.substr(0, comma));
        if (term.empty()) throw ParseError(where + ": term normalizes to nothing");
        PnLabel label;
        try {
            label = pn_label_from_string(line.substr(comma + 1));
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
        auto [it, inserted] = out.labels.emplace(term, label);
        if (!inserted && it->second != label)
            throw ParseError(where + ": conflicting label for term '" + term + "'");
    }
    return out;
}

std::string annotations_to_csv(const AnnotationSet& annotations) {
    std::string out = "term,label\n";
    for (const auto& [term, label] : annotations.labels) {
        out += term;
        out.push_back(',');
        out += to_string(label);
        out.push_back('\n');
    }
    return out;
}

AnnotationSet load_annotations(const std::string& path) {
    return annotations_from_csv(read_file(path));
}

void save_annotations(const AnnotationSet& annotations, const std::string& path) {
    write_file(path, annotations_to_csv(annotations));
}

PrecisionCurve precision_at_n(const CandidateList& candidates, const AnnotationSet& annotations,
                              int max_n) {
    if (max_n < 1) throw DomainError("precision_at_n: max_n must be positive");
    int limit = std::min<int>(max_n, (int)candidates.size());

    std::vector<Violation> missing;
    for (int i = 0; i < limit; i++)
        if (!annotations.labels.count(candidates[(size_t)i].term))
            missing.push_back({candidates[(size_t)i].term, "missing annotation"});
    if (!missing.empty()) {
        std::string msg = "unannotated candidate terms:";
        for (const auto& v : missing) msg += " '" + v.concept_id + "'";
        throw ValidationError(msg, missing);
    }

    PrecisionCurve curve;
    curve.reserve((size_t)limit);
    int positives = 0;
    for (int n = 1; n <= limit; n++) {
        if (annotations.labels.at(candidates[(size_t)n - 1].term) == PnLabel::P) positives++;
        curve.push_back({n, (double)positives / (double)n});
    }
    return curve;
}

std::string curve_to_csv(const PrecisionCurve& curve) {
    std::string out = "n,precision\n";
    for (const auto& point : curve) {
        out += std::to_string(point.n);
        out.push_back(',');
        out += format_double(point.precision);
        out.push_back('\n');
    }
    return out;
}

std::string compare_report(const std::vector<std::string>& names,
                           const std::vector<PrecisionCurve>& curves) {
    if (names.size() != curves.size())
        throw DomainError("compare: name/curve count mismatch");
    if (curves.empty()) throw DomainError("compare: no curves");

    std::string out = "n";
    for (const auto& name : names) {
        out.push_back(',');
        out += name;
    }
    out.push_back('\n');

    size_t rows = 0;
    for (const auto& curve : curves) rows = std::max(rows, curve.size());
    for (size_t r = 0; r < rows; r++) {
        out += std::to_string(r + 1);
        for (const auto& curve : curves) {
            out.push_back(',');
            if (r < curve.size()) out += format_double(curve[r].precision);
        }
        out.push_back('\n');
    }
    return out;
}

} // namespace ontosearch
