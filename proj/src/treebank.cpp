#include "sdprelex/treebank.hpp"

#include <sstream>

namespace sdprelex {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            cols.push_back(line.substr(start));
            break;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return cols;
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-') {
        neg = true;
        i = 1;
        if (s.size() == 1) return false;
    }
    long v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
        if (v > 1000000) return false;
    }
    out = static_cast<int>(neg ? -v : v);
    return true;
}

}  // namespace

void validate_tree(const DepSentence& s, const std::string& label) {
    const int n = s.size();
    if (n == 0) throw StructureError(label + ": empty sentence");
    int roots = 0;
    for (const Token& t : s.tokens) {
        if (t.head < 0 || t.head > n)
            throw StructureError(label + ": token " + std::to_string(t.index) +
                                 " has head " + std::to_string(t.head) +
                                 " out of range [0," + std::to_string(n) + "]");
        if (t.head == t.index)
            throw StructureError(label + ": token " + std::to_string(t.index) +
                                 " is its own head");
        if (t.head == 0) ++roots;
    }
    if (roots != 1)
        throw StructureError(label + ": expected exactly one root, found " +
                             std::to_string(roots));
    // Walk each head chain; more than n steps means a cycle.
    for (const Token& t : s.tokens) {
        int cur = t.index;
        int steps = 0;
        while (cur != 0) {
            cur = s.token(cur).head;
            if (++steps > n)
                throw StructureError(label + ": head cycle through token " +
                                     std::to_string(t.index));
        }
    }
}

Treebank read_conllu(std::istream& in, bool validate) {
    Treebank tb;
    DepSentence cur;
    int line_no = 0;
    int expected_index = 1;
    std::string line;

    auto flush_sentence = [&]() {
        if (cur.tokens.empty() && cur.comment_lines.empty()) return;
        if (!cur.tokens.empty()) {
            std::string name = "sentence " + std::to_string(tb.sentences.size() + 1);
            const int n = cur.size();
            for (const Token& t : cur.tokens)
                if (t.head < 0 || t.head > n)
                    throw StructureError(name + ": token " + std::to_string(t.index) +
                                         " has head " + std::to_string(t.head) +
                                         " out of range [0," + std::to_string(n) + "]");
            if (validate) validate_tree(cur, name);
            tb.sentences.push_back(std::move(cur));
        }
        cur = DepSentence{};
        expected_index = 1;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush_sentence();
            continue;
        }
        if (line[0] == '#') {
            cur.comment_lines.push_back(line);
            continue;
        }
        std::vector<std::string> cols = split_tabs(line);
        if (cols.size() != 10)
            throw ParseError("line " + std::to_string(line_no) + ": expected 10 columns, got " +
                             std::to_string(cols.size()));
        const std::string& id = cols[0];
        if (id.find('-') != std::string::npos || id.find('.') != std::string::npos)
            continue;  // multiword-token range or empty node
        Token t;
        if (!parse_int(id, t.index) || t.index < 1)
            throw ParseError("line " + std::to_string(line_no) + ": bad token ID \"" + id + "\"");
        if (t.index != expected_index)
            throw ParseError("line " + std::to_string(line_no) + ": token ID " + id +
                             " out of sequence (expected " + std::to_string(expected_index) + ")");
        ++expected_index;
        t.form = cols[1];
        t.pos = cols[3] != "_" ? cols[3] : cols[4];
        if (!parse_int(cols[6], t.head)) {
            // Unparsed input ("_" heads) is fine when tree checks are off.
            if (!validate && cols[6] == "_")
                t.head = 0;
            else
                throw ParseError("line " + std::to_string(line_no) + ": non-integer HEAD \"" +
                                 cols[6] + "\"");
        }
        t.deprel = cols[7];
        cur.tokens.push_back(std::move(t));
    }
    flush_sentence();
    return tb;
}

void write_conllu(const Treebank& tb, std::ostream& out) {
    for (std::size_t i = 0; i < tb.sentences.size(); ++i) {
        const DepSentence& s = tb.sentences[i];
        validate_tree(s, "sentence " + std::to_string(i + 1));
        for (const std::string& c : s.comment_lines) out << c << '\n';
        for (const Token& t : s.tokens) {
            out << t.index << '\t' << t.form << "\t_\t" << t.pos << "\t_\t_\t"
                << t.head << '\t' << t.deprel << "\t_\t_\n";
        }
        out << '\n';
    }
}

bool is_projective(const DepSentence& s) {
    const int n = s.size();
    for (const Token& t : s.tokens) {
        const int h = t.head;
        const int d = t.index;
        const int lo = std::min(h, d);
        const int hi = std::max(h, d);
        for (int k = lo + 1; k < hi; ++k) {
            // k must be a descendant of h
            int cur = k;
            bool under_h = false;
            int steps = 0;
            while (cur != 0 && steps++ <= n) {
                cur = s.token(cur).head;
                if (cur == h) {
                    under_h = true;
                    break;
                }
            }
            if (!under_h) return false;
        }
    }
    return true;
}

}  // namespace sdprelex
