#include "sdprelex/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

#include "sdprelex/errors.hpp"

namespace sdprelex {

bool is_relation_label(const std::string& s) {
    for (const char* l : kRelationLabels)
        if (s == l) return true;
    return false;
}

int relation_label_index(const std::string& s) {
    for (int i = 0; i < kRelationCount; ++i)
        if (s == kRelationLabels[i]) return i;
    throw ParseError("unknown relation label \"" + s + "\"");
}

bool admissible_pair(ConceptType a, ConceptType b) {
    const int problems =
        (a == ConceptType::Problem ? 1 : 0) + (b == ConceptType::Problem ? 1 : 0);
    if (problems == 2) return true;
    return problems == 1;  // problem with treatment or test
}

bool label_matches_types(const std::string& label, ConceptType a, ConceptType b) {
    if (label == "PIP")
        return a == ConceptType::Problem && b == ConceptType::Problem;
    ConceptType other;
    if (a == ConceptType::Problem)
        other = b;
    else if (b == ConceptType::Problem)
        other = a;
    else
        return false;
    if (label.rfind("Tr", 0) == 0) return other == ConceptType::Treatment;
    if (label.rfind("Te", 0) == 0) return other == ConceptType::Test;
    return false;
}

std::vector<std::string> tokenize_line(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

const std::regex kConceptRe(R"re(^c="(.*)" (\d+):(\d+) (\d+):(\d+)\|\|t="(.*)"\s*$)re");
const std::regex kRelationRe(
    R"re(^c="(.*)" (\d+):(\d+) (\d+):(\d+)\|\|r="(.*)"\|\|c="(.*)" (\d+):(\d+) (\d+):(\d+)\s*$)re");

ConceptSpan span_from_match(const std::smatch& m, int base, const std::string& line) {
    ConceptSpan span;
    span.text = lower(m[base].str());
    const int line_start = std::stoi(m[base + 1].str());
    span.start_token = std::stoi(m[base + 2].str());
    const int line_end = std::stoi(m[base + 3].str());
    span.end_token = std::stoi(m[base + 4].str());
    if (line_start != line_end)
        throw ParseError("concept spans multiple text lines: " + line);
    if (span.start_token > span.end_token)
        throw ParseError("concept start offset after end offset: " + line);
    span.sentence_line = line_start;
    return span;
}

std::string span_key(const ConceptSpan& s) {
    return std::to_string(s.sentence_line) + ':' + std::to_string(s.start_token) + '-' +
           std::to_string(s.end_token);
}

bool spans_overlap(const ConceptSpan& a, const ConceptSpan& b) {
    return a.sentence_line == b.sentence_line &&
           std::max(a.start_token, b.start_token) <= std::min(a.end_token, b.end_token);
}

// PIP pairs go earlier-problem first; otherwise the treatment/test argument
// leads and the problem follows.
void normalize_pair(ConceptSpan& a, ConceptSpan& b) {
    const bool swap = (a.concept_type == ConceptType::Problem &&
                       b.concept_type == ConceptType::Problem)
                          ? b.start_token < a.start_token
                          : a.concept_type == ConceptType::Problem;
    if (swap) std::swap(a, b);
}

}  // namespace

ConceptSpan parse_concept_line(const std::string& line) {
    std::smatch m;
    if (!std::regex_match(line, m, kConceptRe))
        throw ParseError("malformed concept line: " + line);
    ConceptSpan span = span_from_match(m, 1, line);
    span.concept_type = concept_type_from_string(lower(m[6].str()));
    return span;
}

RelationRecord parse_relation_line(const std::string& line,
                                   const std::vector<ConceptSpan>& concepts) {
    std::smatch m;
    if (!std::regex_match(line, m, kRelationRe))
        throw ParseError("malformed relation line: " + line);
    ConceptSpan a = span_from_match(m, 1, line);
    ConceptSpan b = span_from_match(m, 7, line);
    const std::string label = m[6].str();
    if (!is_relation_label(label) || label == "NONE")
        throw ParseError("unknown relation label \"" + label + "\" in: " + line);
    if (a.sentence_line != b.sentence_line)
        throw StructureError("relation crosses text lines: " + line);
    if (span_key(a) == span_key(b))
        throw StructureError("relation between a concept and itself: " + line);

    auto resolve = [&](ConceptSpan& span) {
        for (const ConceptSpan& c : concepts)
            if (c.sentence_line == span.sentence_line &&
                c.start_token == span.start_token && c.end_token == span.end_token) {
                span.concept_type = c.concept_type;
                return;
            }
        throw StructureError("relation references unannotated concept " + span_key(span) +
                             ": " + line);
    };
    resolve(a);
    resolve(b);
    if (!label_matches_types(label, a.concept_type, b.concept_type))
        throw StructureError("label " + label + " incompatible with concept types " +
                             to_string(a.concept_type) + "/" + to_string(b.concept_type) +
                             ": " + line);
    normalize_pair(a, b);
    return {label, a, b};
}

namespace {

std::vector<std::string> read_lines(const std::string& path, bool required) {
    std::ifstream in(path);
    if (!in) {
        if (required) throw ParseError("cannot open " + path);
        return {};
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

Document load_document(const std::string& dir, const std::string& id) {
    namespace fs = std::filesystem;
    Document doc;
    doc.id = id;
    const std::string base = (fs::path(dir) / id).string();
    for (const std::string& line : read_lines(base + ".txt", true))
        doc.sentences.push_back(tokenize_line(line));

    for (const std::string& line : read_lines(base + ".con", false)) {
        if (line.empty()) continue;
        ConceptSpan span = parse_concept_line(line);
        if (span.sentence_line < 1 ||
            span.sentence_line > static_cast<int>(doc.sentences.size()))
            throw StructureError(id + ": concept line number " +
                                 std::to_string(span.sentence_line) + " out of range");
        const auto& toks = doc.sentences[static_cast<std::size_t>(span.sentence_line - 1)];
        if (span.end_token >= static_cast<int>(toks.size()))
            throw StructureError(id + ": concept " + span_key(span) +
                                 " exceeds sentence length " +
                                 std::to_string(toks.size()));
        std::string joined;
        for (int t = span.start_token; t <= span.end_token; ++t) {
            if (t > span.start_token) joined += ' ';
            joined += lower(toks[static_cast<std::size_t>(t)]);
        }
        if (joined != span.text)
            throw StructureError(id + ": concept text \"" + span.text +
                                 "\" does not match tokens \"" + joined + "\" at " +
                                 span_key(span));
        doc.concepts.push_back(span);
    }

    for (const std::string& line : read_lines(base + ".rel", false)) {
        if (line.empty()) continue;
        doc.relations.push_back(parse_relation_line(line, doc.concepts));
    }
    return doc;
}

std::vector<Document> load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ParseError("not a directory: " + dir);
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
    std::vector<Document> docs;
    docs.reserve(ids.size());
    for (const std::string& id : ids) docs.push_back(load_document(dir, id));
    return docs;
}

std::string concept_line(const ConceptSpan& c) {
    std::ostringstream out;
    out << "c=\"" << c.text << "\" " << c.sentence_line << ':' << c.start_token << ' '
        << c.sentence_line << ':' << c.end_token << "||t=\"" << to_string(c.concept_type)
        << "\"";
    return out.str();
}

std::string relation_line(const RelationRecord& r) {
    std::ostringstream out;
    out << "c=\"" << r.first.text << "\" " << r.first.sentence_line << ':'
        << r.first.start_token << ' ' << r.first.sentence_line << ':' << r.first.end_token
        << "||r=\"" << r.label << "\"||c=\"" << r.second.text << "\" "
        << r.second.sentence_line << ':' << r.second.start_token << ' '
        << r.second.sentence_line << ':' << r.second.end_token;
    return out.str();
}

void write_document(const Document& doc, const std::string& dir) {
    namespace fs = std::filesystem;
    const std::string base = (fs::path(dir) / doc.id).string();
    auto open = [](const std::string& path) {
        std::ofstream out(path);
        if (!out) throw ParseError("cannot open " + path + " for writing");
        return out;
    };
    {
        std::ofstream out = open(base + ".txt");
        for (const auto& toks : doc.sentences) {
            for (std::size_t t = 0; t < toks.size(); ++t) {
                if (t > 0) out << ' ';
                out << toks[t];
            }
            out << '\n';
        }
    }
    {
        std::ofstream out = open(base + ".con");
        for (const ConceptSpan& c : doc.concepts) out << concept_line(c) << '\n';
    }
    {
        std::ofstream out = open(base + ".rel");
        for (const RelationRecord& r : doc.relations) out << relation_line(r) << '\n';
    }
}

std::vector<RelationCandidate> generate_candidates(const Document& doc,
                                                   CandidateStats* stats) {
    CandidateStats local;
    CandidateStats& st = stats ? *stats : local;

    std::map<std::string, std::string> gold;  // "firstKey|secondKey" -> label
    for (const RelationRecord& r : doc.relations) {
        const std::string key = span_key(r.first) + '|' + span_key(r.second);
        auto [it, inserted] = gold.emplace(key, r.label);
        if (!inserted) {
            if (it->second != r.label)
                throw StructureError(doc.id + ": pair " + key + " labeled both " +
                                     it->second + " and " + r.label);
            ++st.duplicates_merged;
        }
    }

    std::map<int, std::vector<ConceptSpan>> by_line;
    for (const ConceptSpan& c : doc.concepts) by_line[c.sentence_line].push_back(c);

    std::vector<RelationCandidate> out;
    for (auto& [line, spans] : by_line) {
        std::sort(spans.begin(), spans.end(), [](const ConceptSpan& a, const ConceptSpan& b) {
            return a.start_token != b.start_token ? a.start_token < b.start_token
                                                  : a.end_token < b.end_token;
        });
        for (std::size_t i = 0; i < spans.size(); ++i)
            for (std::size_t j = i + 1; j < spans.size(); ++j) {
                if (!admissible_pair(spans[i].concept_type, spans[j].concept_type))
                    continue;
                if (spans_overlap(spans[i], spans[j])) {
                    ++st.overlapping_skipped;
                    continue;
                }
                RelationCandidate cand;
                cand.doc_id = doc.id;
                cand.sentence_line = line;
                cand.first = spans[i];
                cand.second = spans[j];
                normalize_pair(cand.first, cand.second);
                auto it = gold.find(span_key(cand.first) + '|' + span_key(cand.second));
                if (it != gold.end()) {
                    cand.label = it->second;
                    ++st.labeled;
                } else {
                    cand.label = "NONE";
                }
                ++st.pairs;
                out.push_back(std::move(cand));
            }
    }
    return out;
}

void write_candidates(std::ostream& out, const std::vector<RelationCandidate>& cands) {
    for (const RelationCandidate& c : cands)
        out << c.doc_id << '\t' << c.sentence_line << '\t' << c.first.start_token << '-'
            << c.first.end_token << '\t' << to_string(c.first.concept_type) << '\t'
            << c.second.start_token << '-' << c.second.end_token << '\t'
            << to_string(c.second.concept_type) << '\t' << c.label << '\n';
}

std::vector<RelationCandidate> read_candidates(std::istream& in) {
    std::vector<RelationCandidate> out;
    std::string line;
    int lineno = 0;
    auto parse_span = [](const std::string& field, const std::string& ctx) {
        const std::size_t dash = field.find('-');
        if (dash == std::string::npos)
            throw ParseError("bad span field \"" + field + "\" " + ctx);
        ConceptSpan s;
        s.start_token = std::stoi(field.substr(0, dash));
        s.end_token = std::stoi(field.substr(dash + 1));
        return s;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            std::size_t at = line.find('\t', start);
            if (at == std::string::npos) {
                cols.push_back(line.substr(start));
                break;
            }
            cols.push_back(line.substr(start, at - start));
            start = at + 1;
        }
        const std::string ctx = "at candidate line " + std::to_string(lineno);
        if (cols.size() != 7)
            throw ParseError("candidate line needs 7 fields, got " +
                             std::to_string(cols.size()) + " " + ctx);
        RelationCandidate c;
        c.doc_id = cols[0];
        c.sentence_line = std::stoi(cols[1]);
        c.first = parse_span(cols[2], ctx);
        c.first.concept_type = concept_type_from_string(cols[3]);
        c.second = parse_span(cols[4], ctx);
        c.second.concept_type = concept_type_from_string(cols[5]);
        c.first.sentence_line = c.second.sentence_line = c.sentence_line;
        if (!is_relation_label(cols[6]))
            throw ParseError("unknown relation label \"" + cols[6] + "\" " + ctx);
        c.label = cols[6];
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace sdprelex
