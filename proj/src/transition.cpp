#include "sdprelex/transition.hpp"

#include <algorithm>

namespace sdprelex {

std::string to_string(const Transition& t) {
    switch (t.kind) {
        case TransitionKind::Shift: return "SHIFT";
        case TransitionKind::LeftArc: return "LEFT_ARC:" + t.label;
        case TransitionKind::RightArc: return "RIGHT_ARC:" + t.label;
    }
    return "?";
}

Transition transition_from_string(const std::string& s) {
    if (s == "SHIFT") return {TransitionKind::Shift, ""};
    if (s.rfind("LEFT_ARC:", 0) == 0 && s.size() > 9)
        return {TransitionKind::LeftArc, s.substr(9)};
    if (s.rfind("RIGHT_ARC:", 0) == 0 && s.size() > 10)
        return {TransitionKind::RightArc, s.substr(10)};
    throw ParseError("bad transition \"" + s + "\"");
}

int ParserConfiguration::head_of(int token) const {
    for (const Arc& a : arcs)
        if (a.dep == token) return a.head;
    return -1;
}

int ParserConfiguration::leftmost_dep(int token) const {
    int best = -1;
    for (const Arc& a : arcs)
        if (a.head == token && (best < 0 || a.dep < best)) best = a.dep;
    return best;
}

int ParserConfiguration::rightmost_dep(int token) const {
    int best = -1;
    for (const Arc& a : arcs)
        if (a.head == token && a.dep > best) best = a.dep;
    return best;
}

ParserConfiguration initial_config(const DepSentence& s) {
    if (s.size() == 0) throw StructureError("cannot initialize parser on empty sentence");
    ParserConfiguration c;
    c.stack.push_back(0);
    for (int i = 1; i <= s.size(); ++i) c.buffer.push_back(i);
    return c;
}

LegalSet legal_transitions(const ParserConfiguration& c) {
    LegalSet legal;
    legal.shift = !c.buffer.empty();
    const int height = static_cast<int>(c.stack.size());
    if (height >= 2) {
        const int second = c.stack_at(1);
        legal.left_arc = second != 0;
        legal.right_arc =
            second != 0 || (c.buffer.empty() && height == 2);
    }
    return legal;
}

ParserConfiguration apply(const ParserConfiguration& c, const Transition& t) {
    const LegalSet legal = legal_transitions(c);
    ParserConfiguration next = c;
    switch (t.kind) {
        case TransitionKind::Shift:
            if (!legal.shift)
                throw StructureError("illegal SHIFT: buffer is empty");
            next.stack.push_back(next.buffer.front());
            next.buffer.pop_front();
            return next;
        case TransitionKind::LeftArc: {
            if (!legal.left_arc)
                throw StructureError(
                    "illegal LEFT_ARC: needs stack height >= 2 with non-root second-top");
            const int top = c.stack_at(0);
            const int second = c.stack_at(1);
            next.stack.erase(next.stack.end() - 2);
            next.arcs.push_back({top, t.label, second});
            return next;
        }
        case TransitionKind::RightArc: {
            if (!legal.right_arc)
                throw StructureError(
                    "illegal RIGHT_ARC: root attachment is only legal as the terminal step");
            const int top = c.stack_at(0);
            const int second = c.stack_at(1);
            next.stack.pop_back();
            next.arcs.push_back({second, t.label, top});
            return next;
        }
    }
    throw StructureError("unknown transition kind");
}

bool is_terminal(const ParserConfiguration& c) {
    return c.buffer.empty() && c.stack.size() == 1 && c.stack[0] == 0;
}

std::vector<Transition> oracle_sequence(const DepSentence& s) {
    validate_tree(s, "oracle input");
    if (!is_projective(s))
        throw StructureError("oracle input is non-projective");

    // Gold dependent counts; RIGHT_ARC may only fire once the top's subtree
    // is complete, or its remaining dependents would be orphaned.
    std::vector<int> gold_dep_count(static_cast<std::size_t>(s.size()) + 1, 0);
    for (const Token& t : s.tokens) gold_dep_count[static_cast<std::size_t>(t.head)]++;

    std::vector<Transition> seq;
    ParserConfiguration c = initial_config(s);
    std::vector<int> attached_deps(static_cast<std::size_t>(s.size()) + 1, 0);
    while (!is_terminal(c)) {
        const int top = c.stack_at(0);
        const int second = c.stack_at(1);
        Transition t;
        if (second > 0 && s.token(second).head == top) {
            t = {TransitionKind::LeftArc, s.token(second).deprel};
        } else if (second >= 0 && top > 0 && s.token(top).head == second &&
                   attached_deps[static_cast<std::size_t>(top)] ==
                       gold_dep_count[static_cast<std::size_t>(top)]) {
            t = {TransitionKind::RightArc, s.token(top).deprel};
        } else {
            t = {TransitionKind::Shift, ""};
        }
        if (!legal_transitions(c).allows(t.kind))
            throw StructureError("oracle derived an illegal transition; input is not a valid projective tree");
        if (t.kind != TransitionKind::Shift) {
            const int dep = t.kind == TransitionKind::LeftArc ? second : top;
            attached_deps[static_cast<std::size_t>(s.token(dep).head)]++;
        }
        c = apply(c, t);
        seq.push_back(std::move(t));
    }
    return seq;
}

}  // namespace sdprelex
