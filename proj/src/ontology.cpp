#include "ontosearch/ontology.hpp"

#include <algorithm>

#include <json.hpp>

#include "ontosearch/io.hpp"
#include "ontosearch/text.hpp"

using nlohmann::json;

namespace ontosearch {

std::string to_string(ConceptKind kind) {
    switch (kind) {
        case ConceptKind::Product: return "Product";
        case ConceptKind::Brand: return "Brand";
        case ConceptKind::Attribute: return "Attribute";
    }
    return "?";
}

ConceptKind concept_kind_from_string(const std::string& s) {
    if (s == "Product") return ConceptKind::Product;
    if (s == "Brand") return ConceptKind::Brand;
    if (s == "Attribute") return ConceptKind::Attribute;
    throw ParseError("unknown concept kind: '" + s + "'");
}

Ontology::Ontology() {
    units = {{"inch", 2.54}, {"cm", 1.0}};
}

void Ontology::rebuild_index() {
    children_.clear();
    lexicon_.clear();
    lexicon_max_tokens_ = 0;
    for (const auto& [id, c] : concepts) {
        if (c.parent) children_[*c.parent].push_back(id);
        auto add_phrase = [&](const std::string& phrase) {
            if (phrase.empty()) return;
            lexicon_[phrase].push_back(id);
            size_t tokens = 1 + (size_t)std::count(phrase.begin(), phrase.end(), ' ');
            lexicon_max_tokens_ = std::max(lexicon_max_tokens_, tokens);
        };
        add_phrase(c.name);
        for (const auto& syn : c.synonyms) add_phrase(syn);
    }
    for (auto& [phrase, ids] : lexicon_) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
}

const std::vector<std::string>* Ontology::children_of(const std::string& id) const {
    auto it = children_.find(id);
    return it == children_.end() ? nullptr : &it->second;
}

const std::vector<std::string>* Ontology::lexicon_lookup(const std::string& phrase) const {
    auto it = lexicon_.find(phrase);
    return it == lexicon_.end() ? nullptr : &it->second;
}

bool Ontology::operator==(const Ontology& o) const {
    return concepts == o.concepts && attributes_slot == o.attributes_slot &&
           default_product == o.default_product && prepositions == o.prepositions &&
           units == o.units;
}

ValidationError::ValidationError(std::string what, std::vector<Violation> violations)
    : Error(std::move(what)), violations_(std::move(violations)) {}

namespace {

bool valid_concept_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

void check_slot_endpoint(const Ontology& o, const std::string& slot, const std::string& id,
                         ConceptKind want, const char* role, std::vector<Violation>& out) {
    auto it = o.concepts.find(id);
    if (it == o.concepts.end()) {
        out.push_back({id, slot + " " + role + " refers to unknown concept"});
    } else if (it->second.kind != want) {
        out.push_back({id, slot + " " + role + " must be " + to_string(want)});
    }
}

} // namespace

std::vector<Violation> validate(const Ontology& o) {
    std::vector<Violation> out;

    for (const auto& [id, c] : o.concepts) {
        if (!valid_concept_id(id))
            out.push_back({id, "id must match [a-z0-9_-]+"});
        if (c.id != id)
            out.push_back({id, "concept id does not match its map key"});
        if (c.name.empty())
            out.push_back({id, "name must be non-empty"});
        if (c.synonyms.count(c.name))
            out.push_back({id, "name must not be listed as a synonym"});
        if (c.parent) {
            auto pit = o.concepts.find(*c.parent);
            if (pit == o.concepts.end())
                out.push_back({id, "parent '" + *c.parent + "' does not exist"});
            else if (pit->second.kind != c.kind)
                out.push_back({id, "parent '" + *c.parent + "' has a different kind"});
        }
        if (c.kind == ConceptKind::Attribute && !c.attribute_subclass)
            out.push_back({id, "attribute_subclass required for Attribute concepts"});
        if (c.kind != ConceptKind::Attribute && c.attribute_subclass)
            out.push_back({id, "attribute_subclass only allowed on Attribute concepts"});
    }

    // is-a links must form a forest
    std::map<std::string, int> state; // 0 new, 1 on current chain, 2 done
    for (const auto& [start, c] : o.concepts) {
        if (state[start] != 0) continue;
        std::vector<std::string> path;
        std::string cur = start;
        while (true) {
            auto it = o.concepts.find(cur);
            if (it == o.concepts.end()) break; // dangling parent reported above
            int& st = state[cur];
            if (st == 1) {
                auto begin = std::find(path.begin(), path.end(), cur);
                std::vector<std::string> cycle(begin, path.end());
                std::string anchor = *std::min_element(cycle.begin(), cycle.end());
                std::string chain;
                for (const auto& n : cycle) chain += n + " -> ";
                chain += cur;
                out.push_back({anchor, "cycle in parent chain: " + chain});
                break;
            }
            if (st == 2) break;
            st = 1;
            path.push_back(cur);
            if (!it->second.parent) break;
            cur = *it->second.parent;
        }
        for (const auto& n : path) state[n] = 2;
    }

    for (const auto& [pid, attrs] : o.attributes_slot) {
        check_slot_endpoint(o, "attributes_slot", pid, ConceptKind::Product, "domain", out);
        for (const auto& aid : attrs)
            check_slot_endpoint(o, "attributes_slot", aid, ConceptKind::Attribute, "range", out);
    }
    for (const auto& [bid, pid] : o.default_product) {
        check_slot_endpoint(o, "default_product", bid, ConceptKind::Brand, "domain", out);
        check_slot_endpoint(o, "default_product", pid, ConceptKind::Product, "range", out);
    }

    auto unit_ok = [&](const char* name, double factor) {
        auto it = o.units.find(name);
        if (it == o.units.end() || it->second != factor)
            out.push_back({"", std::string("unit_table must contain ") + name + "=" +
                                   format_double(factor)});
    };
    unit_ok("inch", 2.54);
    unit_ok("cm", 1.0);

    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        return a.concept_id != b.concept_id ? a.concept_id < b.concept_id : a.reason < b.reason;
    });
    return out;
}

std::set<std::string> descendants_or_self(const Ontology& o, const std::string& id) {
    if (!o.concepts.count(id)) throw DomainError("unknown concept: " + id);
    std::set<std::string> seen{id};
    std::vector<std::string> stack{id};
    while (!stack.empty()) {
        std::string cur = stack.back();
        stack.pop_back();
        if (const auto* kids = o.children_of(cur)) {
            for (const auto& kid : *kids)
                if (seen.insert(kid).second) stack.push_back(kid);
        }
    }
    return seen;
}

std::vector<TermMatch> resolve_term(const Ontology& o, const std::vector<std::string>& phrase) {
    std::vector<TermMatch> out;
    size_t max_len = std::min(phrase.size(), o.lexicon_max_tokens());
    for (size_t len = max_len; len >= 1; len--) {
        std::string prefix;
        for (size_t i = 0; i < len; i++) {
            if (i) prefix.push_back(' ');
            prefix += phrase[i];
        }
        if (const auto* ids = o.lexicon_lookup(prefix)) {
            for (const auto& id : *ids)
                out.push_back({id, o.concepts.at(id).kind, len});
        }
    }
    return out;
}

std::string ontology_to_json(const Ontology& o) {
    json j;
    json concepts = json::array();
    for (const auto& [id, c] : o.concepts) {
        json jc;
        jc["id"] = c.id;
        jc["kind"] = to_string(c.kind);
        jc["name"] = c.name;
        jc["synonyms"] = c.synonyms;
        jc["parent"] = c.parent ? json(*c.parent) : json(nullptr);
        jc["attribute_subclass"] =
            c.attribute_subclass ? json(*c.attribute_subclass) : json(nullptr);
        concepts.push_back(std::move(jc));
    }
    j["concepts"] = std::move(concepts);
    j["attributes_slot"] = o.attributes_slot;
    j["default_product"] = o.default_product;
    j["prepositions"] = o.prepositions;
    j["units"] = o.units;
    return j.dump(2) + "\n";
}

Ontology ontology_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("ontology: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("ontology: top level must be a JSON object");

    Ontology o;
    try {
        if (j.contains("concepts")) {
            if (!j["concepts"].is_array())
                throw ParseError("ontology: 'concepts' must be an array");
            size_t idx = 0;
            for (const auto& jc : j["concepts"]) {
                std::string where = "concepts[" + std::to_string(idx++) + "]";
                if (!jc.is_object()) throw ParseError("ontology: " + where + " must be an object");
                for (const char* field : {"id", "kind", "name"})
                    if (!jc.contains(field))
                        throw ParseError("ontology: " + where + ": missing field '" + field + "'");
                Concept c;
                c.id = jc["id"].get<std::string>();
                c.kind = concept_kind_from_string(jc["kind"].get<std::string>());
                c.name = normalize_phrase(jc["name"].get<std::string>());
                if (jc.contains("synonyms"))
                    for (const auto& s : jc["synonyms"])
                        c.synonyms.insert(normalize_phrase(s.get<std::string>()));
                if (jc.contains("parent") && !jc["parent"].is_null())
                    c.parent = jc["parent"].get<std::string>();
                if (jc.contains("attribute_subclass") && !jc["attribute_subclass"].is_null())
                    c.attribute_subclass = jc["attribute_subclass"].get<std::string>();
                if (o.concepts.count(c.id))
                    throw ParseError("ontology: duplicate concept id '" + c.id + "'");
                o.concepts.emplace(c.id, std::move(c));
            }
        }
        if (j.contains("attributes_slot"))
            for (const auto& [pid, arr] : j["attributes_slot"].items())
                for (const auto& aid : arr)
                    o.attributes_slot[pid].insert(aid.get<std::string>());
        if (j.contains("default_product"))
            for (const auto& [bid, pid] : j["default_product"].items())
                o.default_product[bid] = pid.get<std::string>();
        if (j.contains("prepositions"))
            for (const auto& p : j["prepositions"]) {
                std::string tok = normalize_and_stem(p.get<std::string>());
                if (!tok.empty()) o.prepositions.insert(tok);
            }
        if (j.contains("units"))
            for (const auto& [name, factor] : j["units"].items()) {
                std::string key = normalize_and_stem(name);
                if (!key.empty()) o.units[key] = factor.get<double>();
            }
    } catch (const json::exception& e) {
        throw ParseError(std::string("ontology: ") + e.what());
    }

    o.rebuild_index();
    auto violations = validate(o);
    if (!violations.empty()) {
        std::string msg = "ontology invalid (" + std::to_string(violations.size()) + " violation";
        if (violations.size() > 1) msg += "s";
        msg += "):";
        for (const auto& v : violations)
            msg += "\n  " + (v.concept_id.empty() ? std::string("<ontology>") : v.concept_id) +
                   ": " + v.reason;
        throw ValidationError(msg, violations);
    }
    return o;
}

Ontology load_ontology(const std::string& path) {
    return ontology_from_json(read_file(path));
}

void save_ontology(const Ontology& o, const std::string& path) {
    write_file(path, ontology_to_json(o));
}

} // namespace ontosearch
