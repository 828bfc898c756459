#include "sdprelex/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>

#include "sdprelex/io_util.hpp"
#include "sdprelex/rng.hpp"

namespace sdprelex {

namespace {

const char* kMagic = "SDPRELEX-PARSER";
constexpr std::uint32_t kFormatVersion = 1;

std::string lowercase(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void add_specials(Vocabulary& v) {
    v.add("<null>");
    v.add("<unk>");
    v.add("<root>");
}

// Softmax cross-entropy on one logit column; returns loss, fills probs.
double softmax_xent(const Eigen::VectorXd& logits, int gold, Eigen::VectorXd& probs) {
    const double mx = logits.maxCoeff();
    probs = (logits.array() - mx).exp();
    const double z = probs.sum();
    probs /= z;
    return std::log(z) - (logits(gold) - mx);
}

}  // namespace

int ParserModel::word_id(const std::string& form) const {
    return words.lookup_or(lowercase(form), kUnkId);
}

int ParserModel::pos_id(const std::string& tag) const {
    return pos_tags.lookup_or(tag, kUnkId);
}

int ParserModel::transition_id(const Transition& t) const {
    for (std::size_t i = 0; i < transitions.size(); ++i)
        if (transitions[i] == t) return static_cast<int>(i);
    return -1;
}

ParserFeatureVector extract_features(const ParserConfiguration& c,
                                     const DepSentence& s,
                                     const ParserModel& m) {
    auto word_of = [&](int tok) {
        if (tok < 0) return kNullId;
        if (tok == 0) return kRootId;
        return m.word_id(s.token(tok).form);
    };
    auto pos_of = [&](int tok) {
        if (tok < 0) return kNullId;
        if (tok == 0) return kRootId;
        return m.pos_id(s.token(tok).pos);
    };

    ParserFeatureVector fv;
    std::array<int, ParserFeatureVector::kSlots> toks;
    for (int i = 0; i < 4; ++i) toks[static_cast<std::size_t>(i)] = c.stack_at(i);
    for (int i = 0; i < 4; ++i) toks[static_cast<std::size_t>(4 + i)] = c.buffer_at(i);
    const int s0 = c.stack_at(0);
    const int s1 = c.stack_at(1);
    toks[8] = s0 >= 0 ? c.leftmost_dep(s0) : -1;
    toks[9] = s0 >= 0 ? c.rightmost_dep(s0) : -1;
    toks[10] = s1 >= 0 ? c.leftmost_dep(s1) : -1;
    toks[11] = s1 >= 0 ? c.rightmost_dep(s1) : -1;

    for (int i = 0; i < ParserFeatureVector::kSlots; ++i) {
        fv.word_ids[static_cast<std::size_t>(i)] = word_of(toks[static_cast<std::size_t>(i)]);
        fv.pos_ids[static_cast<std::size_t>(i)] = pos_of(toks[static_cast<std::size_t>(i)]);
    }
    return fv;
}

namespace {

Eigen::VectorXd assemble_input(const ParserModel& m, const ParserFeatureVector& fv) {
    const int d = m.hyper.embed_dim;
    Eigen::VectorXd x(m.input_dim());
    for (int i = 0; i < ParserFeatureVector::kSlots; ++i) {
        x.segment(i * d, d) = m.word_embedding.row(fv.word_ids[static_cast<std::size_t>(i)]);
        x.segment((ParserFeatureVector::kSlots + i) * d, d) =
            m.pos_embedding.row(fv.pos_ids[static_cast<std::size_t>(i)]);
    }
    return x;
}

}  // namespace

Eigen::VectorXd parser_logits(const ParserModel& m, const ParserFeatureVector& fv) {
    const Eigen::VectorXd x = assemble_input(m, fv);
    const Eigen::VectorXd h =
        (m.hidden_weight * x + m.hidden_bias).cwiseMax(0.0);
    return m.output_weight * h + m.output_bias;
}

double parser_loss_and_grads(const ParserModel& m,
                             std::span<const ParserExample> batch,
                             ParserGradients* grads) {
    const int d = m.hyper.embed_dim;
    const auto n = static_cast<Eigen::Index>(batch.size());
    if (grads != nullptr) {
        grads->word_rows.clear();
        grads->pos_rows.clear();
        grads->hidden_weight = Eigen::MatrixXd::Zero(m.hidden_weight.rows(), m.hidden_weight.cols());
        grads->hidden_bias = Eigen::VectorXd::Zero(m.hidden_bias.size());
        grads->output_weight = Eigen::MatrixXd::Zero(m.output_weight.rows(), m.output_weight.cols());
        grads->output_bias = Eigen::VectorXd::Zero(m.output_bias.size());
    }

    // Batch as columns.
    Eigen::MatrixXd X(m.input_dim(), n);
    for (Eigen::Index b = 0; b < n; ++b)
        X.col(b) = assemble_input(m, batch[static_cast<std::size_t>(b)].features);

    Eigen::MatrixXd pre = (m.hidden_weight * X).colwise() + m.hidden_bias;
    Eigen::MatrixXd H = pre.cwiseMax(0.0);
    Eigen::MatrixXd logits = (m.output_weight * H).colwise() + m.output_bias;

    double loss = 0.0;
    Eigen::MatrixXd dlogits(logits.rows(), n);
    for (Eigen::Index b = 0; b < n; ++b) {
        Eigen::VectorXd probs;
        const int gold = batch[static_cast<std::size_t>(b)].gold_transition;
        loss += softmax_xent(logits.col(b), gold, probs);
        probs(gold) -= 1.0;
        dlogits.col(b) = probs / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);
    if (grads == nullptr) return loss;

    grads->output_weight = dlogits * H.transpose();
    grads->output_bias = dlogits.rowwise().sum();
    Eigen::MatrixXd dH = m.output_weight.transpose() * dlogits;
    dH = dH.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    grads->hidden_weight = dH * X.transpose();
    grads->hidden_bias = dH.rowwise().sum();
    Eigen::MatrixXd dX = m.hidden_weight.transpose() * dH;

    for (Eigen::Index b = 0; b < n; ++b) {
        const ParserFeatureVector& fv = batch[static_cast<std::size_t>(b)].features;
        for (int i = 0; i < ParserFeatureVector::kSlots; ++i) {
            {
                auto [it, fresh] = grads->word_rows.try_emplace(
                    fv.word_ids[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(d));
                it->second += dX.col(b).segment(i * d, d);
            }
            {
                auto [it, fresh] = grads->pos_rows.try_emplace(
                    fv.pos_ids[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(d));
                it->second += dX.col(b).segment((ParserFeatureVector::kSlots + i) * d, d);
            }
        }
    }
    return loss;
}

namespace {

// Oracle-unrolled training data plus the singleton flags used for UNK
// replacement.
struct ParserTrainData {
    std::vector<ParserExample> examples;
    std::vector<bool> word_is_singleton;
};

ParserTrainData unroll(const ParserModel& m, const std::vector<const DepSentence*>& sents,
                       const std::vector<int>& word_freq) {
    ParserTrainData data;
    data.word_is_singleton.assign(static_cast<std::size_t>(m.words.size()), false);
    for (std::size_t w = 3; w < static_cast<std::size_t>(m.words.size()); ++w)
        data.word_is_singleton[w] = word_freq[w] == 1;

    for (const DepSentence* s : sents) {
        ParserConfiguration c = initial_config(*s);
        for (const Transition& t : oracle_sequence(*s)) {
            ParserExample ex;
            ex.features = extract_features(c, *s, m);
            ex.gold_transition = m.transition_id(t);
            data.examples.push_back(std::move(ex));
            c = apply(c, t);
        }
    }
    return data;
}

double full_pass_accuracy(const ParserModel& m, const std::vector<ParserExample>& examples) {
    if (examples.empty()) return 0.0;
    long correct = 0;
    for (const ParserExample& ex : examples) {
        Eigen::Index best;
        parser_logits(m, ex.features).maxCoeff(&best);
        if (static_cast<int>(best) == ex.gold_transition) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace

ParserModel train_parser(const Treebank& tb, const ParserHyper& hyper,
                         ParserTrainLog* log) {
    if (tb.sentences.empty()) throw StructureError("empty training treebank");

    ParserTrainLog local_log;
    ParserTrainLog& tl = log != nullptr ? *log : local_log;
    tl = ParserTrainLog{};

    std::vector<const DepSentence*> usable;
    for (const DepSentence& s : tb.sentences) {
        validate_tree(s, "training sentence");
        if (is_projective(s))
            usable.push_back(&s);
        else
            ++tl.sentences_nonprojective_excluded;
    }
    if (usable.empty())
        throw StructureError("no projective sentences left to train on (" +
                             std::to_string(tl.sentences_nonprojective_excluded) +
                             " excluded)");
    tl.sentences_used = static_cast<int>(usable.size());

    ParserModel m;
    m.hyper = hyper;
    add_specials(m.words);
    add_specials(m.pos_tags);
    std::vector<int> word_freq(3, 0);
    for (const DepSentence* s : usable) {
        for (const Token& t : s->tokens) {
            int id = m.words.add(lowercase(t.form));
            if (id == static_cast<int>(word_freq.size()))
                word_freq.push_back(0);
            ++word_freq[static_cast<std::size_t>(id)];
            m.pos_tags.add(t.pos);
        }
    }
    // Transition inventory in first-seen order.
    for (const DepSentence* s : usable)
        for (const Transition& t : oracle_sequence(*s))
            if (m.transition_id(t) < 0) m.transitions.push_back(t);

    const int d = hyper.embed_dim;
    const int T = static_cast<int>(m.transitions.size());
    Rng rng(hyper.seed);
    auto uniform_matrix = [&](Eigen::Index r, Eigen::Index cc, double range) {
        Eigen::MatrixXd mat(r, cc);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < cc; ++j) mat(i, j) = rng.uniform(-range, range);
        return mat;
    };
    m.word_embedding = uniform_matrix(m.words.size(), d, 0.05);
    m.pos_embedding = uniform_matrix(m.pos_tags.size(), d, 0.05);
    m.hidden_weight = uniform_matrix(hyper.hidden_size, m.input_dim(), 0.08);
    m.hidden_bias = Eigen::VectorXd::Zero(hyper.hidden_size);
    m.output_weight = uniform_matrix(T, hyper.hidden_size, 0.08);
    m.output_bias = Eigen::VectorXd::Zero(T);

    ParserTrainData data = unroll(m, usable, word_freq);
    tl.examples = static_cast<int>(data.examples.size());

    std::vector<std::size_t> order(data.examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const double lr = hyper.learning_rate;
    ParserGradients grads;
    std::vector<ParserExample> batch;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(hyper.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                ParserExample ex = data.examples[order[i]];
                for (int slot = 0; slot < ParserFeatureVector::kSlots; ++slot) {
                    int& w = ex.features.word_ids[static_cast<std::size_t>(slot)];
                    if (data.word_is_singleton[static_cast<std::size_t>(w)] &&
                        rng.bernoulli(hyper.unk_replace_rate))
                        w = kUnkId;
                }
                batch.push_back(std::move(ex));
            }
            const double loss = parser_loss_and_grads(m, batch, &grads);
            if (!std::isfinite(loss))
                throw NumericError("non-finite parser loss at epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batches + 1));
            loss_sum += loss;
            ++batches;

            m.hidden_weight -= lr * grads.hidden_weight;
            m.hidden_bias -= lr * grads.hidden_bias;
            m.output_weight -= lr * grads.output_weight;
            m.output_bias -= lr * grads.output_bias;
            for (const auto& [row, g] : grads.word_rows)
                m.word_embedding.row(row) -= lr * g.transpose();
            for (const auto& [row, g] : grads.pos_rows)
                m.pos_embedding.row(row) -= lr * g.transpose();
        }
        ParserEpochStats stats;
        stats.epoch = epoch + 1;
        stats.mean_loss = batches > 0 ? loss_sum / batches : 0.0;
        stats.accuracy = full_pass_accuracy(m, data.examples);
        tl.epochs.push_back(stats);
    }
    return m;
}

DepSentence parse(const ParserModel& m, const DepSentence& s) {
    DepSentence out = s;
    for (Token& t : out.tokens) {
        t.head = 0;
        t.deprel.clear();
    }
    if (s.size() == 0) return out;

    ParserConfiguration c = initial_config(s);
    while (!is_terminal(c)) {
        const LegalSet legal = legal_transitions(c);
        const Eigen::VectorXd logits = parser_logits(m, extract_features(c, s, m));
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m.transitions.size(); ++i) {
            if (!legal.allows(m.transitions[i].kind)) continue;
            const double score = logits(static_cast<Eigen::Index>(i));
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(i);
            }
        }
        if (best < 0)
            throw StructureError("no legal transition scored; transition inventory incomplete");
        c = apply(c, m.transitions[static_cast<std::size_t>(best)]);
    }
    for (const Arc& a : c.arcs) {
        out.token(a.dep).head = a.head;
        out.token(a.dep).deprel = a.label;
    }
    return out;
}

AttachmentScore evaluate_uas_las(const Treebank& gold, const Treebank& pred) {
    if (gold.sentences.size() != pred.sentences.size())
        throw StructureError("sentence count mismatch: gold " +
                             std::to_string(gold.sentences.size()) + ", predicted " +
                             std::to_string(pred.sentences.size()));
    long total = 0, head_ok = 0, both_ok = 0;
    for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
        const DepSentence& g = gold.sentences[i];
        const DepSentence& p = pred.sentences[i];
        if (g.size() != p.size())
            throw StructureError("token count mismatch in sentence " + std::to_string(i + 1));
        for (int t = 1; t <= g.size(); ++t) {
            ++total;
            if (g.token(t).head == p.token(t).head) {
                ++head_ok;
                if (g.token(t).deprel == p.token(t).deprel) ++both_ok;
            }
        }
    }
    AttachmentScore score;
    score.tokens = total;
    if (total > 0) {
        score.uas = 100.0 * static_cast<double>(head_ok) / static_cast<double>(total);
        score.las = 100.0 * static_cast<double>(both_ok) / static_cast<double>(total);
    }
    return score;
}

void save_parser_model(const ParserModel& m, std::ostream& out) {
    out.write(kMagic, static_cast<std::streamsize>(std::string(kMagic).size()));
    io::write_u32(out, kFormatVersion);
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.epochs));
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.batch_size));
    io::write_f64(out, m.hyper.learning_rate);
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.hidden_size));
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.embed_dim));
    io::write_f64(out, m.hyper.unk_replace_rate);
    io::write_u64(out, m.hyper.seed);
    m.words.save(out);
    m.pos_tags.save(out);
    io::write_u64(out, m.transitions.size());
    for (const Transition& t : m.transitions) io::write_string(out, to_string(t));
    io::write_matrix(out, m.word_embedding);
    io::write_matrix(out, m.pos_embedding);
    io::write_matrix(out, m.hidden_weight);
    io::write_vector(out, m.hidden_bias);
    io::write_matrix(out, m.output_weight);
    io::write_vector(out, m.output_bias);
}

ParserModel load_parser_model(std::istream& in) {
    io::expect_magic(in, kMagic);
    const std::uint32_t version = io::read_u32(in);
    if (version != kFormatVersion)
        throw ParseError("unsupported parser model version " + std::to_string(version));
    ParserModel m;
    m.hyper.epochs = static_cast<int>(io::read_u32(in));
    m.hyper.batch_size = static_cast<int>(io::read_u32(in));
    m.hyper.learning_rate = io::read_f64(in);
    m.hyper.hidden_size = static_cast<int>(io::read_u32(in));
    m.hyper.embed_dim = static_cast<int>(io::read_u32(in));
    m.hyper.unk_replace_rate = io::read_f64(in);
    m.hyper.seed = io::read_u64(in);
    m.words = Vocabulary::load(in);
    m.pos_tags = Vocabulary::load(in);
    const std::uint64_t nt = io::read_u64(in);
    for (std::uint64_t i = 0; i < nt; ++i)
        m.transitions.push_back(transition_from_string(io::read_string(in)));
    m.word_embedding = io::read_matrix(in);
    m.pos_embedding = io::read_matrix(in);
    m.hidden_weight = io::read_matrix(in);
    m.hidden_bias = io::read_vector(in);
    m.output_weight = io::read_matrix(in);
    m.output_bias = io::read_vector(in);
    return m;
}

void save_parser_model(const ParserModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    save_parser_model(m, out);
}

ParserModel load_parser_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return load_parser_model(in);
}

}  // namespace sdprelex
