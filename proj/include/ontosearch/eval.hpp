#ifndef ONTOSEARCH_EVAL_HPP
#define ONTOSEARCH_EVAL_HPP

#include <map>
#include <string>
#include <vector>

#include "ontosearch/candidates.hpp"

namespace ontosearch {

enum class PnLabel { P, N };

std::string to_string(PnLabel label);
PnLabel pn_label_from_string(const std::string& s);

/// Manual product/not-product judgments, keyed by candidate term.
struct AnnotationSet {
    std::map<std::string, PnLabel> labels;

    bool operator==(const AnnotationSet&) const = default;
};

/// CSV `term,label` with labels P or N.
AnnotationSet annotations_from_csv(const std::string& text);
std::string annotations_to_csv(const AnnotationSet& annotations);
AnnotationSet load_annotations(const std::string& path);
void save_annotations(const AnnotationSet& annotations, const std::string& path);

struct PrecisionPoint {
    int n = 0;
    double precision = 0;

    bool operator==(const PrecisionPoint&) const = default;
};

using PrecisionCurve = std::vector<PrecisionPoint>;

/// precision@n for n = 1..min(max_n, |candidates|). Every evaluated
/// candidate must be annotated; otherwise throws ValidationError listing
/// the missing terms.
PrecisionCurve precision_at_n(const CandidateList& candidates, const AnnotationSet& annotations,
                              int max_n = 500);

/// CSV `n,precision` for one curve.
std::string curve_to_csv(const PrecisionCurve& curve);

/// Aligned CSV `n,<name1>,<name2>,...`; shorter curves leave their column
/// blank past their last point (truncated, never padded).
std::string compare_report(const std::vector<std::string>& names,
                           const std::vector<PrecisionCurve>& curves);

} // namespace ontosearch

#endif
