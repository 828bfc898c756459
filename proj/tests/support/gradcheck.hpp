#pragma once

// Finite-difference gradient checking for both models. Central differences
// with a fixed step, compared entry by entry against the analytic gradients.
// Seeds are advanced until every ReLU pre-activation clears the kink by a
// margin, so the probe step can never flip a unit's state mid-difference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdprelex/parser.hpp"
#include "sdprelex/relex.hpp"
#include "sdprelex/rng.hpp"

namespace testgrad {

constexpr double kStep = 1e-5;
constexpr double kReluMargin = 1e-3;

struct GradCheck {
    double max_rel_err = 0.0;
    long checked = 0;

    void note(double analytic, double numeric) {
        const double denom =
            std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        max_rel_err = std::max(max_rel_err, std::abs(analytic - numeric) / denom);
        ++checked;
    }
};

// ---- parser ----------------------------------------------------------------

inline sdprelex::ParserModel tiny_parser_model(std::uint64_t seed) {
    using namespace sdprelex;
    ParserModel m;
    m.hyper.embed_dim = 2;
    m.hyper.hidden_size = 3;
    for (const char* w :
         {"<null>", "<unk>", "<root>", "fever", "cough", "aspirin", "dose"})
        m.words.add(w);
    for (const char* p : {"<null>", "<unk>", "<root>", "NN", "VB"}) m.pos_tags.add(p);
    m.transitions = {transition_from_string("SHIFT"),
                     transition_from_string("LEFT_ARC:a"),
                     transition_from_string("RIGHT_ARC:b")};
    Rng rng(seed);
    auto mat = [&](Eigen::Index r, Eigen::Index c, double range) {
        Eigen::MatrixXd out(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) out(i, j) = rng.uniform(-range, range);
        return out;
    };
    auto vec = [&](Eigen::Index n, double range) {
        Eigen::VectorXd out(n);
        for (Eigen::Index i = 0; i < n; ++i) out(i) = rng.uniform(-range, range);
        return out;
    };
    m.word_embedding = mat(m.words.size(), 2, 0.5);
    m.pos_embedding = mat(m.pos_tags.size(), 2, 0.5);
    m.hidden_weight = mat(3, m.input_dim(), 0.7);
    m.hidden_bias = vec(3, 0.5);
    m.output_weight = mat(3, 3, 0.7);
    m.output_bias = vec(3, 0.5);
    return m;
}

inline std::vector<sdprelex::ParserExample> tiny_parser_batch(
    const sdprelex::ParserModel& m, std::uint64_t seed) {
    sdprelex::Rng rng(seed);
    std::vector<sdprelex::ParserExample> batch;
    for (int b = 0; b < 3; ++b) {
        sdprelex::ParserExample ex;
        for (int i = 0; i < sdprelex::ParserFeatureVector::kSlots; ++i) {
            ex.features.word_ids[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m.words.size())));
            ex.features.pos_ids[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m.pos_tags.size())));
        }
        ex.gold_transition = static_cast<int>(rng.uniform_int(3));
        batch.push_back(ex);
    }
    return batch;
}

// Rebuilds the documented input layout: twelve word segments, then twelve POS
// segments. Doubles as an independent check of that layout where used.
inline Eigen::VectorXd parser_input(const sdprelex::ParserModel& m,
                                    const sdprelex::ParserFeatureVector& fv) {
    const int d = m.hyper.embed_dim;
    Eigen::VectorXd x(m.input_dim());
    for (int i = 0; i < sdprelex::ParserFeatureVector::kSlots; ++i) {
        x.segment(i * d, d) =
            m.word_embedding.row(fv.word_ids[static_cast<std::size_t>(i)]);
        x.segment((sdprelex::ParserFeatureVector::kSlots + i) * d, d) =
            m.pos_embedding.row(fv.pos_ids[static_cast<std::size_t>(i)]);
    }
    return x;
}

inline double parser_relu_margin(const sdprelex::ParserModel& m,
                                 const std::vector<sdprelex::ParserExample>& batch) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& ex : batch) {
        const Eigen::VectorXd pre =
            m.hidden_weight * parser_input(m, ex.features) + m.hidden_bias;
        margin = std::min(margin, pre.cwiseAbs().minCoeff());
    }
    return margin;
}

inline GradCheck check_parser_gradients(std::uint64_t seed) {
    using namespace sdprelex;
    for (std::uint64_t attempt = 0; attempt < 25; ++attempt) {
        ParserModel m = tiny_parser_model(seed + attempt);
        std::vector<ParserExample> batch = tiny_parser_batch(m, seed + 100 + attempt);
        if (parser_relu_margin(m, batch) < kReluMargin) continue;

        ParserGradients g;
        parser_loss_and_grads(m, batch, &g);
        GradCheck check;
        auto probe = [&](double* p) {
            const double orig = *p;
            *p = orig + kStep;
            const double lp = parser_loss_and_grads(m, batch, nullptr);
            *p = orig - kStep;
            const double lm = parser_loss_and_grads(m, batch, nullptr);
            *p = orig;
            return (lp - lm) / (2.0 * kStep);
        };
        auto dense = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
            for (Eigen::Index i = 0; i < param.size(); ++i)
                check.note(grad.data()[i], probe(param.data() + i));
        };
        auto densev = [&](Eigen::VectorXd& param, const Eigen::VectorXd& grad) {
            for (Eigen::Index i = 0; i < param.size(); ++i)
                check.note(grad(i), probe(param.data() + i));
        };
        dense(m.hidden_weight, g.hidden_weight);
        densev(m.hidden_bias, g.hidden_bias);
        dense(m.output_weight, g.output_weight);
        densev(m.output_bias, g.output_bias);
        for (const auto& [row, gv] : g.word_rows)
            for (Eigen::Index j = 0; j < gv.size(); ++j)
                check.note(gv(j), probe(&m.word_embedding(row, j)));
        for (const auto& [row, gv] : g.pos_rows)
            for (Eigen::Index j = 0; j < gv.size(); ++j)
                check.note(gv(j), probe(&m.pos_embedding(row, j)));
        return check;
    }
    throw std::runtime_error("no ReLU-safe parser gradient-check seed found");
}

// ---- relation model --------------------------------------------------------

inline std::vector<sdprelex::SdpInstance> gradcheck_instances(bool extra_lengths) {
    using sdprelex::SdpInstance;
    std::vector<SdpInstance> out;
    SdpInstance a;  // the length-4 core case
    a.words = {"aspirin", "manages", "rash", "fever"};
    a.concept_bio = {"B_Treatment", "O", "B_Problem", "I_Problem"};
    a.deprels = {"nsubj", "root", "obj", "amod"};
    a.pos = {"NN", "VB", "NN", "JJ"};
    a.label = "TrIP";
    out.push_back(a);
    if (extra_lengths) {
        SdpInstance b;
        b.words = {"labs"};
        b.concept_bio = {"B_Test"};
        b.deprels = {"root"};
        b.pos = {"NN"};
        b.label = "NONE";
        out.push_back(b);
        SdpInstance c;
        c.words = {"fever", "with", "rash", "and", "cough"};
        c.concept_bio = {"B_Problem", "O", "B_Problem", "O", "O"};
        c.deprels = {"root", "prep", "pobj", "cc", "conj"};
        c.pos = {"NN", "IN", "NN", "CC", "NN"};
        c.label = "PIP";
        out.push_back(c);
    }
    return out;
}

inline sdprelex::RelexModel tiny_relex_model(std::uint64_t seed,
                                             const std::vector<sdprelex::SdpInstance>& insts) {
    using namespace sdprelex;
    RelexHyper hyper;
    hyper.hidden_size = 3;
    hyper.dense_size = 3;
    hyper.word_dim = 2;
    hyper.feat_dim = 2;
    hyper.dropout = 0.0;
    hyper.seed = seed;
    RelexModel m = init_relex_model(insts, hyper);
    // Push the state out of the near-linear regime: larger weights, live biases.
    Rng rng(seed + 7);
    auto spice = [&](Eigen::MatrixXd& w) { w *= 5.0; };
    auto bias = [&](Eigen::VectorXd& b) {
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.6, 0.6);
    };
    spice(m.lstm.w_f);
    spice(m.lstm.w_i);
    spice(m.lstm.w_c);
    spice(m.lstm.w_o);
    spice(m.w_dense);
    spice(m.w_out);
    bias(m.lstm.b_f);
    bias(m.lstm.b_i);
    bias(m.lstm.b_c);
    bias(m.lstm.b_o);
    bias(m.b_dense);
    bias(m.b_out);
    return m;
}

inline double relex_relu_margin(const sdprelex::RelexModel& m,
                                const std::vector<sdprelex::SdpInstance>& insts,
                                const Eigen::VectorXd* mask) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& inst : insts) {
        const sdprelex::RelexForward fw = relex_forward(m, inst, mask);
        const Eigen::VectorXd pre = m.w_dense * fw.dropped + m.b_dense;
        margin = std::min(margin, pre.cwiseAbs().minCoeff());
    }
    return margin;
}

// `with_mask` checks the training path against a fixed dropout mask.
inline GradCheck check_relex_gradients(std::uint64_t seed, bool extra_lengths,
                                       bool with_mask) {
    using namespace sdprelex;
    const std::vector<SdpInstance> insts = gradcheck_instances(extra_lengths);
    Eigen::VectorXd mask(3);
    mask << 1.0 / 0.7, 0.0, 1.0 / 0.7;
    const Eigen::VectorXd* mp = with_mask ? &mask : nullptr;

    for (std::uint64_t attempt = 0; attempt < 25; ++attempt) {
        RelexModel m = tiny_relex_model(seed + attempt, insts);
        if (relex_relu_margin(m, insts, mp) < kReluMargin) continue;

        GradCheck check;
        RelexGradients g;
        for (const SdpInstance& inst : insts) {
            relex_loss_and_grads(m, inst, &g, mp);
            auto probe = [&](double* p) {
                const double orig = *p;
                *p = orig + kStep;
                const double lp = relex_loss_and_grads(m, inst, nullptr, mp);
                *p = orig - kStep;
                const double lm = relex_loss_and_grads(m, inst, nullptr, mp);
                *p = orig;
                return (lp - lm) / (2.0 * kStep);
            };
            auto dense = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
                for (Eigen::Index i = 0; i < param.size(); ++i)
                    check.note(grad.data()[i], probe(param.data() + i));
            };
            auto densev = [&](Eigen::VectorXd& param, const Eigen::VectorXd& grad) {
                for (Eigen::Index i = 0; i < param.size(); ++i)
                    check.note(grad(i), probe(param.data() + i));
            };
            dense(m.lstm.w_f, g.lstm.w_f);
            dense(m.lstm.w_i, g.lstm.w_i);
            dense(m.lstm.w_c, g.lstm.w_c);
            dense(m.lstm.w_o, g.lstm.w_o);
            densev(m.lstm.b_f, g.lstm.b_f);
            densev(m.lstm.b_i, g.lstm.b_i);
            densev(m.lstm.b_c, g.lstm.b_c);
            densev(m.lstm.b_o, g.lstm.b_o);
            dense(m.w_dense, g.w_dense);
            densev(m.b_dense, g.b_dense);
            dense(m.w_out, g.w_out);
            densev(m.b_out, g.b_out);
            auto rows = [&](Eigen::MatrixXd& emb,
                            const std::map<int, Eigen::VectorXd>& rg) {
                for (const auto& [row, gv] : rg)
                    for (Eigen::Index j = 0; j < gv.size(); ++j)
                        check.note(gv(j), probe(&emb(row, j)));
            };
            rows(m.word_emb, g.word_rows);
            rows(m.concept_emb, g.concept_rows);
            rows(m.deprel_emb, g.deprel_rows);
            rows(m.pos_emb, g.pos_rows);
        }
        return check;
    }
    throw std::runtime_error("no ReLU-safe relation gradient-check seed found");
}

}  // namespace testgrad
