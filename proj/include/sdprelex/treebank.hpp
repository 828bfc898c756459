#ifndef SDPRELEX_TREEBANK_HPP
#define SDPRELEX_TREEBANK_HPP

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sdprelex/errors.hpp"

namespace sdprelex {

// One token of a dependency-annotated sentence. Indices are 1-based within
// the sentence; head 0 is the artificial root.
struct Token {
    int index = 0;
    std::string form;
    std::string pos;
    int head = 0;
    std::string deprel;
};

struct DepSentence {
    std::vector<Token> tokens;
    std::vector<std::string> comment_lines;  // "#"-prefixed, kept verbatim

    int size() const { return static_cast<int>(tokens.size()); }
    const Token& token(int index_1based) const {
        return tokens.at(static_cast<std::size_t>(index_1based - 1));
    }
    Token& token(int index_1based) {
        return tokens.at(static_cast<std::size_t>(index_1based - 1));
    }
};

struct Treebank {
    std::vector<DepSentence> sentences;
    std::string source_path;
};

// Throws StructureError unless the sentence is a well-formed tree: heads in
// range, no self-loops, exactly one root, acyclic. `label` names the
// sentence in error messages.
void validate_tree(const DepSentence& s, const std::string& label);

// CoNLL-U text: 10 tab-separated columns, blank-line sentence separation,
// "#" comments preserved. ID ranges (multiword tokens, "1-2") and empty
// nodes ("1.1") are skipped. POS comes from UPOS, falling back to XPOS when
// UPOS is "_". When validate is false, tree invariants are not enforced
// (used for to-be-parsed input where heads are dummies).
Treebank read_conllu(std::istream& in, bool validate = true);

// Inverse of read_conllu on the populated columns; unpopulated columns are
// "_". Refuses to serialize invalid trees.
void write_conllu(const Treebank& tb, std::ostream& out);

// True iff no two arcs cross when drawn above the sentence (the root arc
// from position 0 included). Checked as: every token strictly between an
// arc's endpoints is a descendant of the arc's head.
bool is_projective(const DepSentence& s);

}  // namespace sdprelex

#endif
