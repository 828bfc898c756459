#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdprelex/sdp.hpp"

namespace sdprelex {

// Relation inventory, in the order used for classifier outputs and reports.
inline constexpr std::array<const char*, 9> kRelationLabels = {
    "TrIP", "TrWP", "TrCP", "TrAP", "TrNAP", "TeRP", "TeCP", "PIP", "NONE"};
inline constexpr int kRelationCount = 9;
inline constexpr int kNoneIndex = 8;

bool is_relation_label(const std::string& s);
int relation_label_index(const std::string& s);  // ParseError on unknown label

// A pair is a candidate only when it can carry some relation: two problems,
// or a problem with a treatment or test.
bool admissible_pair(ConceptType a, ConceptType b);
bool label_matches_types(const std::string& label, ConceptType a, ConceptType b);

struct RelationRecord {
    std::string label;
    ConceptSpan first;   // treatment/test argument, or earlier problem for PIP
    ConceptSpan second;  // problem argument
};

struct Document {
    std::string id;
    std::vector<std::vector<std::string>> sentences;  // tokens per text line
    std::vector<ConceptSpan> concepts;
    std::vector<RelationRecord> relations;
};

std::vector<std::string> tokenize_line(const std::string& line);

// c="<text>" L:S L:E||t="<type>"
ConceptSpan parse_concept_line(const std::string& line);
// c="<text>" L:S L:E||r="<label>"||c="<text>" L:S L:E
// Argument types are joined from the already-parsed concept list; the pair is
// returned in normalized order.
RelationRecord parse_relation_line(const std::string& line,
                                   const std::vector<ConceptSpan>& concepts);

// Reads <dir>/<id>.txt plus the .con/.rel files of the same stem (annotation
// files may be absent) and cross-checks annotations against the text.
Document load_document(const std::string& dir, const std::string& id);
// Loads every *.txt stem in the directory, sorted by id.
std::vector<Document> load_corpus(const std::string& dir);

// Canonical annotation-line rendering (inverse of the parse functions).
std::string concept_line(const ConceptSpan& c);
std::string relation_line(const RelationRecord& r);
// Writes <dir>/<id>.txt/.con/.rel in canonical form.
void write_document(const Document& doc, const std::string& dir);

struct RelationCandidate {
    std::string doc_id;
    int sentence_line = 0;  // 1-based text line
    ConceptSpan first;
    ConceptSpan second;
    std::string label;  // gold label or NONE
};

struct CandidateStats {
    int pairs = 0;                // candidates emitted
    int labeled = 0;              // candidates with a non-NONE gold label
    int overlapping_skipped = 0;  // admissible pairs dropped for overlapping spans
    int duplicates_merged = 0;    // identical gold relation lines merged
};

std::vector<RelationCandidate> generate_candidates(const Document& doc,
                                                   CandidateStats* stats = nullptr);

// doc_id \t line \t S-E \t type \t S-E \t type \t label
void write_candidates(std::ostream& out, const std::vector<RelationCandidate>& cands);
std::vector<RelationCandidate> read_candidates(std::istream& in);

}  // namespace sdprelex
