#ifndef SDPRELEX_TRANSITION_HPP
#define SDPRELEX_TRANSITION_HPP

#include <deque>
#include <string>
#include <vector>

#include "sdprelex/treebank.hpp"

namespace sdprelex {

enum class TransitionKind { LeftArc, RightArc, Shift };

struct Transition {
    TransitionKind kind = TransitionKind::Shift;
    std::string label;  // empty iff Shift

    bool operator==(const Transition& o) const = default;
};

// "SHIFT" | "LEFT_ARC:<label>" | "RIGHT_ARC:<label>"
std::string to_string(const Transition& t);
Transition transition_from_string(const std::string& s);

struct Arc {
    int head = 0;
    std::string label;
    int dep = 0;

    bool operator==(const Arc& o) const = default;
};

// Arc-standard parser state. The stack bottom holds the artificial root
// (index 0); the buffer holds unread token indices in sentence order.
struct ParserConfiguration {
    std::vector<int> stack;
    std::deque<int> buffer;
    std::vector<Arc> arcs;

    int stack_at(int depth) const {  // 0 = top
        int i = static_cast<int>(stack.size()) - 1 - depth;
        return i >= 0 ? stack[static_cast<std::size_t>(i)] : -1;
    }
    int buffer_at(int pos) const {  // 0 = front
        return pos < static_cast<int>(buffer.size())
                   ? buffer[static_cast<std::size_t>(pos)]
                   : -1;
    }
    // -1 when the token has no head yet.
    int head_of(int token) const;
    // Leftmost/rightmost dependent committed so far, -1 if none.
    int leftmost_dep(int token) const;
    int rightmost_dep(int token) const;
};

struct LegalSet {
    bool left_arc = false;
    bool right_arc = false;
    bool shift = false;

    bool allows(TransitionKind k) const {
        switch (k) {
            case TransitionKind::LeftArc: return left_arc;
            case TransitionKind::RightArc: return right_arc;
            case TransitionKind::Shift: return shift;
        }
        return false;
    }
};

// stack = [0], buffer = [1..n], arcs = {}. Empty sentence is an error.
ParserConfiguration initial_config(const DepSentence& s);

// SHIFT needs a non-empty buffer. LEFT_ARC needs stack height >= 2 with the
// second-top not the root. RIGHT_ARC attaching to the root is only legal as
// the terminal step (buffer empty, stack exactly [0, j]), which forces a
// single root.
LegalSet legal_transitions(const ParserConfiguration& c);

// Returns the successor configuration; throws StructureError on an illegal
// transition (never a silent no-op).
ParserConfiguration apply(const ParserConfiguration& c, const Transition& t);

// buffer empty and stack reduced to [0].
bool is_terminal(const ParserConfiguration& c);

// Static oracle for a gold projective tree: LEFT_ARC when the second-top's
// gold head is the top; RIGHT_ARC when the top's gold head is the second-top
// and all of the top's gold dependents are attached; SHIFT otherwise.
// Replaying the result from initial_config rebuilds the gold arcs exactly in
// 2n transitions. Non-projective input throws StructureError.
std::vector<Transition> oracle_sequence(const DepSentence& s);

}  // namespace sdprelex

#endif
