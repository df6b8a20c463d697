#include "ontosearch/candidates.hpp"

#include <algorithm>

#include "ontosearch/errors.hpp"
#include "ontosearch/io.hpp"

namespace ontosearch {

CandidateList rank_candidates(const std::map<std::string, int>& frequencies) {
    CandidateList out;
    out.reserve(frequencies.size());
    for (const auto& [term, freq] : frequencies) out.push_back({0, term, freq});
    std::sort(out.begin(), out.end(), [](const CandidateRow& a, const CandidateRow& b) {
        return a.frequency != b.frequency ? a.frequency > b.frequency : a.term < b.term;
    });
    for (size_t i = 0; i < out.size(); i++) out[i].rank = (int)i + 1;
    return out;
}

std::string candidates_to_csv(const CandidateList& candidates) {
    std::string out = "rank,term,frequency\n";
    for (const auto& row : candidates)
        out += std::to_string(row.rank) + "," + row.term + "," + std::to_string(row.frequency) +
               "\n";
    return out;
}

CandidateList candidates_from_csv(const std::string& text) {
    CandidateList out;
    size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        line_no++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "rank,term,frequency") continue;
        auto fields = split(line, ',');
        if (fields.size() != 3)
            throw ParseError("candidates CSV line " + std::to_string(line_no) +
                             ": expected rank,term,frequency");
        try {
            out.push_back({std::stoi(fields[0]), fields[1], std::stoi(fields[2])});
        } catch (const std::exception&) {
            throw ParseError("candidates CSV line " + std::to_string(line_no) +
                             ": bad numeric field");
        }
    }
    return out;
}

CandidateList load_candidates(const std::string& path) {
    return candidates_from_csv(read_file(path));
}

void save_candidates(const CandidateList& candidates, const std::string& path) {
    write_file(path, candidates_to_csv(candidates));
}

} // namespace ontosearch
