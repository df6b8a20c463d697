#ifndef ONTOSEARCH_CANDIDATES_HPP
#define ONTOSEARCH_CANDIDATES_HPP

#include <map>
#include <string>
#include <vector>

namespace ontosearch {

/// One row of a ranked product-candidate list.
struct CandidateRow {
    int rank = 0;
    std::string term;
    int frequency = 0;

    bool operator==(const CandidateRow&) const = default;
};

using CandidateList = std::vector<CandidateRow>;

/// Orders term frequencies by frequency descending then term ascending and
/// assigns contiguous ranks from 1.
CandidateList rank_candidates(const std::map<std::string, int>& frequencies);

/// CSV with header rank,term,frequency.
std::string candidates_to_csv(const CandidateList& candidates);
CandidateList candidates_from_csv(const std::string& text);
CandidateList load_candidates(const std::string& path);
void save_candidates(const CandidateList& candidates, const std::string& path);

} // namespace ontosearch

#endif
