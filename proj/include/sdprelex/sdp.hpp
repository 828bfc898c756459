#ifndef SDPRELEX_SDP_HPP
#define SDPRELEX_SDP_HPP

#include <string>
#include <vector>

#include "sdprelex/treebank.hpp"

namespace sdprelex {

enum class ConceptType { Problem, Treatment, Test };

std::string to_string(ConceptType t);
ConceptType concept_type_from_string(const std::string& s);

// An annotated concept: token offsets are 0-based inclusive within its
// sentence line (1-based line numbers, i2b2 style).
struct ConceptSpan {
    int sentence_line = 0;
    int start_token = 0;
    int end_token = 0;
    ConceptType concept_type = ConceptType::Problem;
    std::string text;

    bool operator==(const ConceptSpan& o) const = default;
};

// Aligned feature sequences along (and around) the shortest dependency path
// between two concepts. All four sequences have the same length.
struct SdpInstance {
    std::vector<std::string> words;
    std::vector<std::string> concept_bio;  // B_/I_<Type> or O
    std::vector<std::string> deprels;
    std::vector<std::string> pos;
    std::string label;  // relation type or NONE

    std::size_t length() const { return words.size(); }
};

// Undirected view of a dependency tree: nodes 0..n, one edge per token to
// its head, each edge carrying the dependent's deprel.
struct UndirectedDepGraph {
    struct Edge {
        int neighbor = 0;
        std::string label;
    };
    std::vector<std::vector<Edge>> adjacency;  // indexed by node

    int node_count() const { return static_cast<int>(adjacency.size()); }
};

UndirectedDepGraph build_undirected_graph(const DepSentence& s);

// The token inside the span whose head lies outside it; falls back to the
// span's last token when none or several qualify (imperfect parses).
int span_head_token(const ConceptSpan& span, const DepSentence& s);

// Unique simple path between the two concepts' head tokens, oriented from
// c1 to c2. Spans must lie within the sentence and must not overlap.
std::vector<int> shortest_path(const UndirectedDepGraph& g, const ConceptSpan& c1,
                               const ConceptSpan& c2, const DepSentence& s);

// Builds the aligned sequences. Concept-span tokens that are off the path
// are spliced in around the path endpoint in surface order, so multi-token
// concepts appear whole. Each position's deprel is the label of the tree
// edge to the previous position when one exists, otherwise the token's own
// deprel to its head (which is also the convention for the first position).
SdpInstance make_instance(const std::vector<int>& path, const DepSentence& s,
                          const ConceptSpan& c1, const ConceptSpan& c2,
                          const std::string& label);

// Debug/golden format: four tab-separated pipe-joined sequences plus label.
std::string instance_to_line(const SdpInstance& inst);
SdpInstance instance_from_line(const std::string& line);

}  // namespace sdprelex

#endif
