#include "sdprelex/sdp.hpp"

#include <algorithm>
#include <set>

namespace sdprelex {

std::string to_string(ConceptType t) {
    switch (t) {
        case ConceptType::Problem: return "problem";
        case ConceptType::Treatment: return "treatment";
        case ConceptType::Test: return "test";
    }
    return "?";
}

ConceptType concept_type_from_string(const std::string& s) {
    if (s == "problem") return ConceptType::Problem;
    if (s == "treatment") return ConceptType::Treatment;
    if (s == "test") return ConceptType::Test;
    throw ParseError("unknown concept type \"" + s + "\"");
}

UndirectedDepGraph build_undirected_graph(const DepSentence& s) {
    validate_tree(s, "graph input");
    UndirectedDepGraph g;
    g.adjacency.resize(static_cast<std::size_t>(s.size()) + 1);
    for (const Token& t : s.tokens) {
        g.adjacency[static_cast<std::size_t>(t.head)].push_back({t.index, t.deprel});
        g.adjacency[static_cast<std::size_t>(t.index)].push_back({t.head, t.deprel});
    }
    return g;
}

namespace {

void check_span(const ConceptSpan& span, const DepSentence& s) {
    if (span.start_token < 0 || span.start_token > span.end_token ||
        span.end_token >= s.size())
        throw StructureError("concept span " + std::to_string(span.start_token) + ".." +
                             std::to_string(span.end_token) + " out of range for a " +
                             std::to_string(s.size()) + "-token sentence");
}

}  // namespace

int span_head_token(const ConceptSpan& span, const DepSentence& s) {
    check_span(span, s);
    const int lo = span.start_token + 1;  // to 1-based
    const int hi = span.end_token + 1;
    int found = -1;
    int count = 0;
    for (int t = lo; t <= hi; ++t) {
        const int h = s.token(t).head;
        if (h < lo || h > hi) {
            found = t;
            ++count;
        }
    }
    return count == 1 ? found : hi;
}

std::vector<int> shortest_path(const UndirectedDepGraph& g, const ConceptSpan& c1,
                               const ConceptSpan& c2, const DepSentence& s) {
    if (g.node_count() != s.size() + 1)
        throw StructureError("graph/sentence size mismatch");
    check_span(c1, s);
    check_span(c2, s);
    if (std::max(c1.start_token, c2.start_token) <= std::min(c1.end_token, c2.end_token))
        throw StructureError("overlapping concept spans");

    const int a = span_head_token(c1, s);
    const int b = span_head_token(c2, s);

    // Trees have unique simple paths; compose the two head chains at their
    // lowest common ancestor.
    std::vector<int> up_a;  // a, head(a), ..., 0
    for (int cur = a;; cur = s.token(cur).head) {
        up_a.push_back(cur);
        if (cur == 0) break;
    }
    std::vector<int> depth_in_a(static_cast<std::size_t>(s.size()) + 1, -1);
    for (std::size_t i = 0; i < up_a.size(); ++i)
        depth_in_a[static_cast<std::size_t>(up_a[i])] = static_cast<int>(i);

    std::vector<int> up_b;  // b, ..., lca
    int lca = -1;
    for (int cur = b;; cur = s.token(cur).head) {
        if (depth_in_a[static_cast<std::size_t>(cur)] >= 0) {
            lca = cur;
            break;
        }
        up_b.push_back(cur);
        if (cur == 0) break;
    }

    std::vector<int> path;
    for (int i = 0; i <= depth_in_a[static_cast<std::size_t>(lca)]; ++i) path.push_back(up_a[static_cast<std::size_t>(i)]);
    for (auto it = up_b.rbegin(); it != up_b.rend(); ++it) path.push_back(*it);
    return path;
}

SdpInstance make_instance(const std::vector<int>& path, const DepSentence& s,
                          const ConceptSpan& c1, const ConceptSpan& c2,
                          const std::string& label) {
    if (path.size() < 2) throw StructureError("path must span at least one edge");

    std::set<int> on_path(path.begin(), path.end());
    auto span_tokens = [](const ConceptSpan& sp) {
        std::vector<int> toks;
        for (int t = sp.start_token + 1; t <= sp.end_token + 1; ++t) toks.push_back(t);
        return toks;
    };
    // Endpoint position expands to the whole concept: the endpoint plus any
    // span tokens the path missed, in surface order.
    auto block = [&](const ConceptSpan& sp, int endpoint) {
        std::vector<int> b;
        for (int t : span_tokens(sp))
            if (t == endpoint || on_path.count(t) == 0) b.push_back(t);
        return b;  // already ascending
    };

    const std::vector<int> block1 = block(c1, path.front());
    const std::vector<int> block2 = block(c2, path.back());

    std::vector<int> seq;
    for (std::size_t p = 0; p < path.size(); ++p) {
        if (p == 0)
            seq.insert(seq.end(), block1.begin(), block1.end());
        else if (p + 1 == path.size())
            seq.insert(seq.end(), block2.begin(), block2.end());
        else
            seq.push_back(path[p]);
    }

    auto in_span = [](const ConceptSpan& sp, int tok) {
        return tok >= sp.start_token + 1 && tok <= sp.end_token + 1;
    };
    auto suffix = [](ConceptType t) -> std::string {
        switch (t) {
            case ConceptType::Problem: return "Problem";
            case ConceptType::Treatment: return "Treatment";
            case ConceptType::Test: return "Test";
        }
        return "?";
    };

    SdpInstance inst;
    inst.label = label;
    bool seen1 = false, seen2 = false;
    for (std::size_t p = 0; p < seq.size(); ++p) {
        const int tok = seq[p];
        const Token& t = s.token(tok);
        inst.words.push_back(t.form);
        inst.pos.push_back(t.pos);

        if (in_span(c1, tok)) {
            inst.concept_bio.push_back((seen1 ? "I_" : "B_") + suffix(c1.concept_type));
            seen1 = true;
        } else if (in_span(c2, tok)) {
            inst.concept_bio.push_back((seen2 ? "I_" : "B_") + suffix(c2.concept_type));
            seen2 = true;
        } else {
            inst.concept_bio.push_back("O");
        }

        if (p == 0) {
            inst.deprels.push_back(t.deprel);
        } else {
            const int prev = seq[p - 1];
            if (t.head == prev)
                inst.deprels.push_back(t.deprel);
            else if (prev != 0 && s.token(prev).head == tok)
                inst.deprels.push_back(s.token(prev).deprel);
            else
                inst.deprels.push_back(t.deprel);
        }
    }
    return inst;
}

namespace {

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t at = s.find(sep, start);
        if (at == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, at - start));
        start = at + 1;
    }
}

}  // namespace

std::string instance_to_line(const SdpInstance& inst) {
    return join(inst.words, '|') + '\t' + join(inst.concept_bio, '|') + '\t' +
           join(inst.deprels, '|') + '\t' + join(inst.pos, '|') + '\t' + inst.label;
}

SdpInstance instance_from_line(const std::string& line) {
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 5)
        throw ParseError("instance line needs 5 tab-separated fields, got " +
                         std::to_string(cols.size()));
    SdpInstance inst;
    inst.words = split(cols[0], '|');
    inst.concept_bio = split(cols[1], '|');
    inst.deprels = split(cols[2], '|');
    inst.pos = split(cols[3], '|');
    inst.label = cols[4];
    if (inst.concept_bio.size() != inst.words.size() ||
        inst.deprels.size() != inst.words.size() || inst.pos.size() != inst.words.size())
        throw ParseError("instance sequences have unequal lengths");
    return inst;
}

}  // namespace sdprelex
