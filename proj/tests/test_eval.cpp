#include <doctest.h>

#include <cmath>

#include "ontosearch/candidates.hpp"
#include "ontosearch/errors.hpp"
#include "ontosearch/eval.hpp"
#include "ontosearch/io.hpp"
#include "ontosearch/ontology.hpp"
#include "test_util.hpp"

using namespace ontosearch;

namespace {

CandidateList ranked(const std::vector<std::string>& terms) {
    CandidateList out;
    for (size_t i = 0; i < terms.size(); i++)
        out.push_back({static_cast<int>(i) + 1, terms[i],
                       static_cast<int>(terms.size() - i)});
    return out;
}

AnnotationSet annotate_all(const std::vector<std::string>& terms,
                           const std::vector<char>& labels) {
    AnnotationSet s;
    for (size_t i = 0; i < terms.size(); i++)
        s.labels[terms[i]] = labels[i] == 'P' ? PnLabel::P : PnLabel::N;
    return s;
}

} // namespace

TEST_CASE("pn labels round-trip") {
    CHECK(to_string(PnLabel::P) == "P");
    CHECK(to_string(PnLabel::N) == "N");
    CHECK(pn_label_from_string("P") == PnLabel::P);
    CHECK(pn_label_from_string("N") == PnLabel::N);
    CHECK_THROWS_AS(pn_label_from_string("Q"), ParseError);
    CHECK_THROWS_AS(pn_label_from_string(""), ParseError);
}

TEST_CASE("frozen top-10 judgments reproduce the expected precision") {
    // Token-graph extraction: two noise terms in the top ten.
    auto graph_top10 = ranked({"all", "sippycup", "cup", "bib", "playard",
                               "insert", "ct", "highchair", "case", "stroller"});
    auto graph_ann = annotate_all({"all", "sippycup", "cup", "bib", "playard",
                                   "insert", "ct", "highchair", "case", "stroller"},
                                  {'N', 'P', 'P', 'P', 'P', 'P', 'N', 'P', 'P', 'P'});
    auto graph_curve = precision_at_n(graph_top10, graph_ann, 10);
    REQUIRE(graph_curve.size() == 10);
    CHECK(graph_curve.back().n == 10);
    CHECK(graph_curve.back().precision == 0.8);

    // Augmented tagger: a clean top ten.
    auto aug_top10 = ranked({"diaper", "wipe", "formula", "carseat", "bottle",
                             "stroller", "bag", "gate", "cereal", "highchair"});
    auto aug_ann = annotate_all({"diaper", "wipe", "formula", "carseat", "bottle",
                                 "stroller", "bag", "gate", "cereal", "highchair"},
                                {'P', 'P', 'P', 'P', 'P', 'P', 'P', 'P', 'P', 'P'});
    auto aug_curve = precision_at_n(aug_top10, aug_ann, 10);
    CHECK(aug_curve.back().precision == 1.0);

    // Sequence tagger: one miss.
    auto ner_top10 = ranked({"diaper", "wipe", "bottle", "bag", "cover",
                             "ups", "pants", "seat", "pad", "bib"});
    auto ner_ann = annotate_all({"diaper", "wipe", "bottle", "bag", "cover",
                                 "ups", "pants", "seat", "pad", "bib"},
                                {'P', 'P', 'P', 'P', 'P', 'N', 'P', 'P', 'P', 'P'});
    auto ner_curve = precision_at_n(ner_top10, ner_ann, 10);
    CHECK(ner_curve.back().precision == 0.9);

    // Interior points: the graph curve dips exactly where the noise sits.
    CHECK(graph_curve[0].precision == 0.0); // "all" leads the list
    CHECK(graph_curve[1].precision == 0.5);
    CHECK(ner_curve[4].precision == 1.0);
    CHECK(ner_curve[5].precision == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("precision counts positives among the first n") {
    auto cands = ranked({"a", "b", "c", "d"});
    auto ann = annotate_all({"a", "b", "c", "d"}, {'P', 'N', 'P', 'P'});
    auto curve = precision_at_n(cands, ann, 10);
    REQUIRE(curve.size() == 4); // truncated at |candidates|
    CHECK(curve[0] == PrecisionPoint{1, 1.0});
    CHECK(curve[1] == PrecisionPoint{2, 0.5});
    CHECK(curve[2].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(curve[3] == PrecisionPoint{4, 0.75});

    // n * precision@n is always an integer count of positives.
    for (const auto& pt : curve) {
        double count = pt.n * pt.precision;
        CHECK(count == doctest::Approx(std::round(count)).epsilon(1e-12));
    }
}

TEST_CASE("all-positive list scores 1 at every depth") {
    std::vector<std::string> terms;
    for (int i = 0; i < 20; i++) terms.push_back("t" + std::to_string(i));
    auto curve = precision_at_n(ranked(terms), annotate_all(terms, std::vector<char>(20, 'P')));
    REQUIRE(curve.size() == 20);
    for (const auto& pt : curve) CHECK(pt.precision == 1.0);
}

TEST_CASE("max_n truncates the curve") {
    std::vector<std::string> terms = {"a", "b", "c", "d", "e"};
    auto curve = precision_at_n(ranked(terms), annotate_all(terms, {'P', 'P', 'N', 'P', 'P'}), 3);
    REQUIRE(curve.size() == 3);
    CHECK(curve.back().n == 3);
    CHECK_THROWS_AS(precision_at_n(ranked(terms), AnnotationSet{}, 0), DomainError);
    CHECK_THROWS_AS(precision_at_n(ranked(terms), AnnotationSet{}, -2), DomainError);
}

TEST_CASE("empty candidate list yields an empty curve") {
    CHECK(precision_at_n({}, AnnotationSet{}).empty());
}

TEST_CASE("unannotated candidates are reported by term") {
    auto cands = ranked({"known", "mystery", "alien"});
    AnnotationSet ann;
    ann.labels["known"] = PnLabel::P;
    try {
        precision_at_n(cands, ann, 10);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("mystery") != std::string::npos);
        CHECK(msg.find("alien") != std::string::npos);
        REQUIRE(e.violations().size() == 2);
        CHECK(e.violations()[0].reason == "missing annotation");
    }

    // Terms beyond max_n are not required.
    auto curve = precision_at_n(cands, ann, 1);
    CHECK(curve.size() == 1);
}

TEST_CASE("annotation csv round-trips") {
    AnnotationSet s;
    s.labels["dress"] = PnLabel::P;
    s.labels["white"] = PnLabel::N;
    s.labels["bar stool"] = PnLabel::P;
    std::string csv = annotations_to_csv(s);
    CHECK(csv.substr(0, 11) == "term,label\n");
    CHECK(annotations_from_csv(csv) == s);

    testutil::TempDir dir;
    save_annotations(s, dir.file("ann.csv"));
    CHECK(load_annotations(dir.file("ann.csv")) == s);
}

TEST_CASE("annotation csv normalizes terms") {
    auto s = annotations_from_csv("term,label\nDresses,P\n");
    CHECK(s.labels.count("dress") == 1);
}

TEST_CASE("annotation csv rejects malformed input") {
    CHECK_THROWS_WITH_AS(annotations_from_csv("term\nx,P\n"),
                         doctest::Contains("header"), ParseError);
    CHECK_THROWS_WITH_AS(annotations_from_csv("term,label\ndress,Q\n"),
                         doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_WITH_AS(annotations_from_csv("term,label\ndress\n"),
                         doctest::Contains("line 2"), ParseError);
    // Duplicate spellings of one term must agree.
    CHECK_THROWS_WITH_AS(annotations_from_csv("term,label\ndress,P\nDresses,N\n"),
                         doctest::Contains("conflict"), ParseError);
    CHECK_NOTHROW(annotations_from_csv("term,label\ndress,P\nDresses,P\n"));
}

TEST_CASE("curve csv format is exact") {
    PrecisionCurve curve = {{1, 1.0}, {2, 0.5}};
    CHECK(curve_to_csv(curve) == "n,precision\n1,1\n2,0.5\n");
}

TEST_CASE("comparison report aligns curves and truncates") {
    PrecisionCurve a = {{1, 1.0}, {2, 1.0}, {3, 2.0 / 3.0}};
    PrecisionCurve b = {{1, 0.0}, {2, 0.5}};
    std::string report = compare_report({"graph", "cnn"}, {a, b});
    std::vector<std::string> lines = split(report, '\n');
    REQUIRE(lines.size() >= 4);
    CHECK(lines[0] == "n,graph,cnn");
    CHECK(lines[1] == "1,1,0");
    CHECK(lines[2] == "2,1,0.5");
    // The shorter curve leaves its cell blank instead of padding.
    CHECK(lines[3] == "3," + format_double(2.0 / 3.0) + ",");
}

TEST_CASE("comparison report accepts a single curve") {
    std::string report = compare_report({"solo"}, {PrecisionCurve{{1, 1.0}}});
    CHECK(report == "n,solo\n1,1\n");
}

TEST_CASE("comparison report validates its inputs") {
    CHECK_THROWS_AS(compare_report({"a"}, {}), DomainError);
    CHECK_THROWS_AS(compare_report({}, {}), DomainError);
    CHECK_THROWS_AS(compare_report({"a", "b"}, {PrecisionCurve{}}), DomainError);
}
