#ifndef SDPRELEX_PARSER_HPP
#define SDPRELEX_PARSER_HPP

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdprelex/transition.hpp"
#include "sdprelex/treebank.hpp"
#include "sdprelex/vocab.hpp"

namespace sdprelex {

// Feature slot layout, fixed:
//   0-3   top four stack items (0 = top)
//   4-7   first four buffer items
//   8-11  leftmost/rightmost dependent of the stack top, then of the
//         second-top, from the arcs committed so far
// Each slot yields one word id and one POS id. Missing positions get the
// NULL id; the artificial root gets the ROOT id.
struct ParserFeatureVector {
    static constexpr int kSlots = 12;
    std::array<int, kSlots> word_ids{};
    std::array<int, kSlots> pos_ids{};
};

// Reserved ids, first in both vocabularies.
constexpr int kNullId = 0;
constexpr int kUnkId = 1;
constexpr int kRootId = 2;

struct ParserHyper {
    int epochs = 30;
    int batch_size = 64;
    double learning_rate = 0.01;
    int hidden_size = 200;
    int embed_dim = 50;
    double unk_replace_rate = 0.1;  // singleton words -> UNK during training
    std::uint64_t seed = 1;
};

// Greedy transition classifier: two embedding tables feeding one ReLU hidden
// layer and a softmax over the transitions seen in training.
struct ParserModel {
    ParserHyper hyper;
    Vocabulary words;     // lowercased forms; ids 0..2 reserved
    Vocabulary pos_tags;  // verbatim tags; ids 0..2 reserved
    std::vector<Transition> transitions;
    Eigen::MatrixXd word_embedding;  // |V_w| x d
    Eigen::MatrixXd pos_embedding;   // |V_p| x d
    Eigen::MatrixXd hidden_weight;   // hidden x 24d
    Eigen::VectorXd hidden_bias;
    Eigen::MatrixXd output_weight;   // |transitions| x hidden
    Eigen::VectorXd output_bias;

    int input_dim() const { return 2 * ParserFeatureVector::kSlots * hyper.embed_dim; }
    int word_id(const std::string& form) const;  // lowercases, UNK fallback
    int pos_id(const std::string& tag) const;    // UNK fallback
    int transition_id(const Transition& t) const;  // -1 if absent
};

ParserFeatureVector extract_features(const ParserConfiguration& c,
                                     const DepSentence& s,
                                     const ParserModel& m);

struct ParserExample {
    ParserFeatureVector features;
    int gold_transition = 0;
};

// Sparse embedding-row gradients keyed by row id; dense elsewhere.
struct ParserGradients {
    std::map<int, Eigen::VectorXd> word_rows;
    std::map<int, Eigen::VectorXd> pos_rows;
    Eigen::MatrixXd hidden_weight;
    Eigen::VectorXd hidden_bias;
    Eigen::MatrixXd output_weight;
    Eigen::VectorXd output_bias;
};

Eigen::VectorXd parser_logits(const ParserModel& m, const ParserFeatureVector& fv);

// Mean cross-entropy over the batch plus gradients of every parameter
// tensor; the analytic side of the finite-difference check.
double parser_loss_and_grads(const ParserModel& m,
                             std::span<const ParserExample> batch,
                             ParserGradients* grads);

struct ParserEpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double accuracy = 0.0;  // full-pass transition accuracy after the epoch
};

struct ParserTrainLog {
    std::vector<ParserEpochStats> epochs;
    int sentences_used = 0;
    int sentences_nonprojective_excluded = 0;
    int examples = 0;
};

// Builds vocabularies (lowercased words, all frequencies), unrolls oracle
// sequences into (features, transition) pairs and trains by mini-batch
// gradient descent. Deterministic given hyper.seed. Non-projective sentences
// are excluded with a count in the log; an empty effective training set is
// an error.
ParserModel train_parser(const Treebank& tb, const ParserHyper& hyper,
                         ParserTrainLog* log = nullptr);

// Greedy decode with legality masking; terminates in exactly 2n transitions
// and always yields a single-rooted tree. Input heads/deprels are ignored.
DepSentence parse(const ParserModel& m, const DepSentence& s);

struct AttachmentScore {
    double uas = 0.0;  // percent
    double las = 0.0;  // percent
    long tokens = 0;
};

AttachmentScore evaluate_uas_las(const Treebank& gold, const Treebank& pred);

void save_parser_model(const ParserModel& m, std::ostream& out);
ParserModel load_parser_model(std::istream& in);
void save_parser_model(const ParserModel& m, const std::string& path);
ParserModel load_parser_model(const std::string& path);

}  // namespace sdprelex

#endif
