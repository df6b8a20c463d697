#ifndef ONTOSEARCH_ONTOLOGY_HPP
#define ONTOSEARCH_ONTOLOGY_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ontosearch/errors.hpp"

namespace ontosearch {

enum class ConceptKind { Product, Brand, Attribute };

std::string to_string(ConceptKind kind);
ConceptKind concept_kind_from_string(const std::string& s);

struct Concept {
    std::string id;
    ConceptKind kind = ConceptKind::Product;
    std::string name;                              // normalized phrase
    std::set<std::string> synonyms;                // normalized phrases
    std::optional<std::string> parent;             // same-kind concept id
    std::optional<std::string> attribute_subclass; // present iff kind == Attribute

    bool operator==(const Concept&) const = default;
};

struct Violation {
    std::string concept_id; // empty for ontology-level violations
    std::string reason;

    bool operator==(const Violation&) const = default;
};

struct TermMatch {
    std::string concept_id;
    ConceptKind kind = ConceptKind::Product;
    size_t matched_length = 0;
};

/// Search-side ontology: Product / Brand / Attribute concepts, an is-a
/// forest, and the slot tables. Immutable after load(); call
/// rebuild_index() after mutating it by hand.
struct Ontology {
    std::map<std::string, Concept> concepts;
    std::map<std::string, std::set<std::string>> attributes_slot; // product -> attributes
    std::map<std::string, std::string> default_product;           // brand -> product
    std::set<std::string> prepositions;
    std::map<std::string, double> units; // unit name -> factor to canonical (cm)

    Ontology();

    void rebuild_index();

    const std::vector<std::string>* children_of(const std::string& id) const;
    const std::vector<std::string>* lexicon_lookup(const std::string& phrase) const;
    size_t lexicon_max_tokens() const { return lexicon_max_tokens_; }

    bool operator==(const Ontology& o) const;

private:
    std::map<std::string, std::vector<std::string>> children_;
    std::map<std::string, std::vector<std::string>> lexicon_; // phrase -> concept ids
    size_t lexicon_max_tokens_ = 0;
};

/// Thrown when an ontology (or other validated input) fails its invariants.
class ValidationError : public Error {
public:
    ValidationError(std::string what, std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Returns every invariant violation, sorted by concept id then reason.
std::vector<Violation> validate(const Ontology& ontology);

/// Transitive closure of child links plus the id itself.
/// Throws DomainError on an unknown id.
std::set<std::string> descendants_or_self(const Ontology& ontology, const std::string& id);

/// All concepts whose name or synonym matches a prefix of the phrase,
/// longest match first, ties by id.
std::vector<TermMatch> resolve_term(const Ontology& ontology,
                                    const std::vector<std::string>& phrase);

std::string ontology_to_json(const Ontology& ontology);
Ontology ontology_from_json(const std::string& text);

Ontology load_ontology(const std::string& path);
void save_ontology(const Ontology& ontology, const std::string& path);

} // namespace ontosearch

#endif
