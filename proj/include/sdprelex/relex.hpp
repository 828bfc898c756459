#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sdprelex/errors.hpp"
#include "sdprelex/rng.hpp"
#include "sdprelex/sdp.hpp"
#include "sdprelex/vocab.hpp"

namespace sdprelex {

// Concept-channel inventory; anything else maps to the trailing unknown row.
inline constexpr std::array<const char*, 7> kConceptTags = {
    "B_Problem", "I_Problem", "B_Treatment", "I_Treatment",
    "B_Test",    "I_Test",    "O"};

struct RelexHyper {
    int epochs = 50;
    int hidden_size = 512;
    int dense_size = 256;
    int word_dim = 50;
    int feat_dim = 50;  // concept, deprel and pos channels
    double learning_rate = 0.001;
    double decay = 0.9;  // rmsprop moving-average factor
    double epsilon = 1e-8;
    double dropout = 0.3;
    std::uint64_t seed = 1;
};

struct LstmParams {
    Eigen::MatrixXd w_f, w_i, w_c, w_o;  // hidden x (hidden + input)
    Eigen::VectorXd b_f, b_i, b_c, b_o;
};

struct RelexModel {
    RelexHyper hyper;
    Vocabulary words;     // lowercased; index 0 = <unk>
    Vocabulary deprels;   // index 0 = <unk>
    Vocabulary pos_tags;  // index 0 = <unk>
    Eigen::MatrixXd word_emb;     // |words| x word_dim
    Eigen::MatrixXd concept_emb;  // 8 x feat_dim (7 tags + unknown)
    Eigen::MatrixXd deprel_emb;   // |deprels| x feat_dim
    Eigen::MatrixXd pos_emb;      // |pos| x feat_dim
    LstmParams lstm;
    Eigen::MatrixXd w_dense;  // dense x hidden
    Eigen::VectorXd b_dense;
    Eigen::MatrixXd w_out;  // 9 x dense
    Eigen::VectorXd b_out;

    int input_dim() const { return hyper.word_dim + 3 * hyper.feat_dim; }
    int word_id(const std::string& form) const;
    int concept_id(const std::string& tag) const;
    int deprel_id(const std::string& rel) const;
    int pos_id(const std::string& tag) const;
};

// Pre-trained word vectors; later duplicates of a word are dropped.
struct WordVectors {
    int dim = 0;
    Vocabulary vocab;
    Eigen::MatrixXd vectors;  // |vocab| x dim
    int duplicates_dropped = 0;
};

enum class VectorFormat { Text, Binary };
WordVectors load_word_vectors(const std::string& path, VectorFormat format);

// One token's channel concatenation: word | concept | deprel | pos.
Eigen::VectorXd embed_input(const RelexModel& m, const SdpInstance& inst, std::size_t t);

struct RelexForward {
    std::vector<Eigen::VectorXd> x, f, i, cbar, o, c, tanh_c, h;
    Eigen::VectorXd dropped;  // dense input (last hidden state after dropout)
    Eigen::VectorXd dense_act, logits, probs;
};

// Per-unit keep/scale factors for inverted dropout: 1/(1-rate) or 0.
Eigen::VectorXd make_dropout_mask(int size, double rate, Rng& rng);

// dropout_mask == nullptr runs the inference path (no dropout).
RelexForward relex_forward(const RelexModel& m, const SdpInstance& inst,
                           const Eigen::VectorXd* dropout_mask = nullptr);

struct RelexGradients {
    LstmParams lstm;
    Eigen::MatrixXd w_dense, w_out;
    Eigen::VectorXd b_dense, b_out;
    std::map<int, Eigen::VectorXd> word_rows, concept_rows, deprel_rows, pos_rows;
};

// Cross-entropy of the gold label; fills grads when non-null.
double relex_loss_and_grads(const RelexModel& m, const SdpInstance& inst,
                            RelexGradients* grads,
                            const Eigen::VectorXd* dropout_mask = nullptr);

struct RelexTrainLog {
    std::vector<double> epoch_loss;      // mean training loss
    std::vector<double> epoch_accuracy;  // clean-pass argmax accuracy
};

// Builds vocabularies from the instances and initializes all tables; word rows
// come from `pretrained` where available (its dimension then wins).
RelexModel init_relex_model(const std::vector<SdpInstance>& instances,
                            const RelexHyper& hyper,
                            const WordVectors* pretrained = nullptr);

RelexModel train_relex(const std::vector<SdpInstance>& instances, const RelexHyper& hyper,
                       const WordVectors* pretrained = nullptr,
                       RelexTrainLog* log = nullptr);

struct RelexPrediction {
    int label_index = 0;
    std::string label;
    Eigen::VectorXd probs;
};

RelexPrediction predict_relation(const RelexModel& m, const SdpInstance& inst);

void save_relex_model(std::ostream& out, const RelexModel& m);
RelexModel load_relex_model(std::istream& in);
void save_relex_model(const std::string& path, const RelexModel& m);
RelexModel load_relex_model(const std::string& path);

}  // namespace sdprelex
