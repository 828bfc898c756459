#include "sdprelex/relex.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sdprelex/corpus.hpp"
#include "sdprelex/io_util.hpp"

namespace sdprelex {

namespace {

const char* kMagic = "SDPRELEX-RE";
constexpr std::uint32_t kFormatVersion = 1;
constexpr int kConceptRows = static_cast<int>(kConceptTags.size()) + 1;

std::string lowercase(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& a) {
    return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

void check_instance(const SdpInstance& inst) {
    const std::size_t n = inst.words.size();
    if (n == 0) throw StructureError("empty relation instance");
    if (inst.concept_bio.size() != n || inst.deprels.size() != n ||
        inst.pos.size() != n)
        throw StructureError("relation instance channels have unequal lengths");
}

}  // namespace

int RelexModel::word_id(const std::string& form) const {
    return words.lookup_or(lowercase(form), 0);
}

int RelexModel::concept_id(const std::string& tag) const {
    for (std::size_t i = 0; i < kConceptTags.size(); ++i)
        if (tag == kConceptTags[i]) return static_cast<int>(i);
    return static_cast<int>(kConceptTags.size());
}

int RelexModel::deprel_id(const std::string& rel) const {
    return deprels.lookup_or(rel, 0);
}

int RelexModel::pos_id(const std::string& tag) const {
    return pos_tags.lookup_or(tag, 0);
}

Eigen::VectorXd embed_input(const RelexModel& m, const SdpInstance& inst, std::size_t t) {
    if (t >= inst.length())
        throw StructureError("token position out of range in relation instance");
    const int dw = m.hyper.word_dim;
    const int df = m.hyper.feat_dim;
    Eigen::VectorXd x(m.input_dim());
    x.segment(0, dw) = m.word_emb.row(m.word_id(inst.words[t]));
    x.segment(dw, df) = m.concept_emb.row(m.concept_id(inst.concept_bio[t]));
    x.segment(dw + df, df) = m.deprel_emb.row(m.deprel_id(inst.deprels[t]));
    x.segment(dw + 2 * df, df) = m.pos_emb.row(m.pos_id(inst.pos[t]));
    return x;
}

Eigen::VectorXd make_dropout_mask(int size, double rate, Rng& rng) {
    const double keep = 1.0 - rate;
    Eigen::VectorXd mask(size);
    for (int i = 0; i < size; ++i)
        mask(i) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    return mask;
}

RelexForward relex_forward(const RelexModel& m, const SdpInstance& inst,
                           const Eigen::VectorXd* dropout_mask) {
    check_instance(inst);
    const int H = m.hyper.hidden_size;
    const int I = m.input_dim();
    const std::size_t n = inst.length();

    RelexForward fw;
    fw.x.resize(n);
    fw.f.resize(n);
    fw.i.resize(n);
    fw.cbar.resize(n);
    fw.o.resize(n);
    fw.c.resize(n);
    fw.tanh_c.resize(n);
    fw.h.resize(n);

    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd z(H + I);
    for (std::size_t t = 0; t < n; ++t) {
        fw.x[t] = embed_input(m, inst, t);
        z.head(H) = h_prev;
        z.tail(I) = fw.x[t];
        fw.f[t] = sigmoid(m.lstm.w_f * z + m.lstm.b_f);
        fw.i[t] = sigmoid(m.lstm.w_i * z + m.lstm.b_i);
        fw.cbar[t] = (m.lstm.w_c * z + m.lstm.b_c).array().tanh();
        fw.o[t] = sigmoid(m.lstm.w_o * z + m.lstm.b_o);
        fw.c[t] = c_prev.cwiseProduct(fw.f[t]) + fw.i[t].cwiseProduct(fw.cbar[t]);
        fw.tanh_c[t] = fw.c[t].array().tanh();
        fw.h[t] = fw.tanh_c[t].cwiseProduct(fw.o[t]);
        h_prev = fw.h[t];
        c_prev = fw.c[t];
    }

    fw.dropped = dropout_mask != nullptr ? fw.h[n - 1].cwiseProduct(*dropout_mask)
                                         : fw.h[n - 1];
    fw.dense_act = (m.w_dense * fw.dropped + m.b_dense).cwiseMax(0.0);
    fw.logits = m.w_out * fw.dense_act + m.b_out;
    const double mx = fw.logits.maxCoeff();
    fw.probs = (fw.logits.array() - mx).exp();
    fw.probs /= fw.probs.sum();
    return fw;
}

double relex_loss_and_grads(const RelexModel& m, const SdpInstance& inst,
                            RelexGradients* grads,
                            const Eigen::VectorXd* dropout_mask) {
    const RelexForward fw = relex_forward(m, inst, dropout_mask);
    const int gold = relation_label_index(inst.label);
    const double mx = fw.logits.maxCoeff();
    const double loss =
        std::log((fw.logits.array() - mx).exp().sum()) - (fw.logits(gold) - mx);
    if (grads == nullptr) return loss;

    const int H = m.hyper.hidden_size;
    const int I = m.input_dim();
    const int dw = m.hyper.word_dim;
    const int df = m.hyper.feat_dim;
    const std::size_t n = inst.length();

    grads->lstm.w_f = Eigen::MatrixXd::Zero(H, H + I);
    grads->lstm.w_i = Eigen::MatrixXd::Zero(H, H + I);
    grads->lstm.w_c = Eigen::MatrixXd::Zero(H, H + I);
    grads->lstm.w_o = Eigen::MatrixXd::Zero(H, H + I);
    grads->lstm.b_f = Eigen::VectorXd::Zero(H);
    grads->lstm.b_i = Eigen::VectorXd::Zero(H);
    grads->lstm.b_c = Eigen::VectorXd::Zero(H);
    grads->lstm.b_o = Eigen::VectorXd::Zero(H);
    grads->word_rows.clear();
    grads->concept_rows.clear();
    grads->deprel_rows.clear();
    grads->pos_rows.clear();

    Eigen::VectorXd dlogits = fw.probs;
    dlogits(gold) -= 1.0;
    grads->w_out = dlogits * fw.dense_act.transpose();
    grads->b_out = dlogits;
    Eigen::VectorXd dact = m.w_out.transpose() * dlogits;
    const Eigen::VectorXd dpre =
        dact.cwiseProduct((fw.dense_act.array() > 0.0).cast<double>().matrix());
    grads->w_dense = dpre * fw.dropped.transpose();
    grads->b_dense = dpre;

    Eigen::VectorXd dh = m.w_dense.transpose() * dpre;
    if (dropout_mask != nullptr) dh = dh.cwiseProduct(*dropout_mask);
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);

    auto scatter = [](std::map<int, Eigen::VectorXd>& rows, int row,
                      const Eigen::VectorXd& g) {
        auto [it, fresh] = rows.try_emplace(row, Eigen::VectorXd::Zero(g.size()));
        it->second += g;
    };

    const Eigen::VectorXd zero_h = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd z(H + I);
    for (std::size_t t = n; t-- > 0;) {
        const Eigen::VectorXd do_ = dh.cwiseProduct(fw.tanh_c[t]);
        dc += dh.cwiseProduct(fw.o[t])
                  .cwiseProduct((1.0 - fw.tanh_c[t].array().square()).matrix());
        const Eigen::VectorXd& c_prev = t > 0 ? fw.c[t - 1] : zero_h;
        const Eigen::VectorXd df_ = dc.cwiseProduct(c_prev);
        const Eigen::VectorXd di = dc.cwiseProduct(fw.cbar[t]);
        const Eigen::VectorXd dcbar = dc.cwiseProduct(fw.i[t]);

        const Eigen::VectorXd da_f =
            (df_.array() * fw.f[t].array() * (1.0 - fw.f[t].array())).matrix();
        const Eigen::VectorXd da_i =
            (di.array() * fw.i[t].array() * (1.0 - fw.i[t].array())).matrix();
        const Eigen::VectorXd da_o =
            (do_.array() * fw.o[t].array() * (1.0 - fw.o[t].array())).matrix();
        const Eigen::VectorXd da_c =
            (dcbar.array() * (1.0 - fw.cbar[t].array().square())).matrix();

        z.head(H) = t > 0 ? fw.h[t - 1] : zero_h;
        z.tail(I) = fw.x[t];
        grads->lstm.w_f += da_f * z.transpose();
        grads->lstm.w_i += da_i * z.transpose();
        grads->lstm.w_c += da_c * z.transpose();
        grads->lstm.w_o += da_o * z.transpose();
        grads->lstm.b_f += da_f;
        grads->lstm.b_i += da_i;
        grads->lstm.b_c += da_c;
        grads->lstm.b_o += da_o;

        const Eigen::VectorXd dz = m.lstm.w_f.transpose() * da_f +
                                   m.lstm.w_i.transpose() * da_i +
                                   m.lstm.w_c.transpose() * da_c +
                                   m.lstm.w_o.transpose() * da_o;
        dh = dz.head(H);
        dc = dc.cwiseProduct(fw.f[t]);

        const Eigen::VectorXd dx = dz.tail(I);
        scatter(grads->word_rows, m.word_id(inst.words[t]), dx.segment(0, dw));
        scatter(grads->concept_rows, m.concept_id(inst.concept_bio[t]),
                dx.segment(dw, df));
        scatter(grads->deprel_rows, m.deprel_id(inst.deprels[t]),
                dx.segment(dw + df, df));
        scatter(grads->pos_rows, m.pos_id(inst.pos[t]), dx.segment(dw + 2 * df, df));
    }
    return loss;
}

RelexModel init_relex_model(const std::vector<SdpInstance>& instances,
                            const RelexHyper& hyper, const WordVectors* pretrained) {
    if (instances.empty()) throw StructureError("no training instances");

    RelexModel m;
    m.hyper = hyper;
    if (pretrained != nullptr) m.hyper.word_dim = pretrained->dim;
    m.words.add("<unk>");
    m.deprels.add("<unk>");
    m.pos_tags.add("<unk>");
    for (const SdpInstance& inst : instances) {
        check_instance(inst);
        relation_label_index(inst.label);  // reject unknown labels early
        for (std::size_t t = 0; t < inst.length(); ++t) {
            m.words.add(lowercase(inst.words[t]));
            m.deprels.add(inst.deprels[t]);
            m.pos_tags.add(inst.pos[t]);
        }
    }

    Rng rng(m.hyper.seed);
    auto uniform_matrix = [&](Eigen::Index r, Eigen::Index c, double range) {
        Eigen::MatrixXd mat(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) mat(i, j) = rng.uniform(-range, range);
        return mat;
    };

    const int H = m.hyper.hidden_size;
    const int D = m.hyper.dense_size;
    m.word_emb = uniform_matrix(m.words.size(), m.hyper.word_dim, 0.05);
    m.concept_emb = uniform_matrix(kConceptRows, m.hyper.feat_dim, 0.05);
    m.deprel_emb = uniform_matrix(m.deprels.size(), m.hyper.feat_dim, 0.05);
    m.pos_emb = uniform_matrix(m.pos_tags.size(), m.hyper.feat_dim, 0.05);
    const int I = m.input_dim();
    m.lstm.w_f = uniform_matrix(H, H + I, 0.08);
    m.lstm.w_i = uniform_matrix(H, H + I, 0.08);
    m.lstm.w_c = uniform_matrix(H, H + I, 0.08);
    m.lstm.w_o = uniform_matrix(H, H + I, 0.08);
    m.lstm.b_f = Eigen::VectorXd::Zero(H);
    m.lstm.b_i = Eigen::VectorXd::Zero(H);
    m.lstm.b_c = Eigen::VectorXd::Zero(H);
    m.lstm.b_o = Eigen::VectorXd::Zero(H);
    m.w_dense = uniform_matrix(D, H, 0.08);
    m.b_dense = Eigen::VectorXd::Zero(D);
    m.w_out = uniform_matrix(kRelationCount, D, 0.08);
    m.b_out = Eigen::VectorXd::Zero(kRelationCount);

    if (pretrained != nullptr)
        for (int w = 0; w < m.words.size(); ++w) {
            const int src = pretrained->vocab.lookup(m.words.at(w));
            if (src >= 0) m.word_emb.row(w) = pretrained->vectors.row(src);
        }
    return m;
}

namespace {

// rmsprop moving-average caches, one per parameter tensor.
struct RmsState {
    LstmParams lstm;
    Eigen::MatrixXd w_dense, w_out;
    Eigen::VectorXd b_dense, b_out;
    Eigen::MatrixXd word_emb, concept_emb, deprel_emb, pos_emb;
};

RmsState zero_rms(const RelexModel& m) {
    RmsState s;
    auto zm = [](const Eigen::MatrixXd& p) {
        return Eigen::MatrixXd::Zero(p.rows(), p.cols()).eval();
    };
    auto zv = [](const Eigen::VectorXd& p) {
        return Eigen::VectorXd::Zero(p.size()).eval();
    };
    s.lstm.w_f = zm(m.lstm.w_f);
    s.lstm.w_i = zm(m.lstm.w_i);
    s.lstm.w_c = zm(m.lstm.w_c);
    s.lstm.w_o = zm(m.lstm.w_o);
    s.lstm.b_f = zv(m.lstm.b_f);
    s.lstm.b_i = zv(m.lstm.b_i);
    s.lstm.b_c = zv(m.lstm.b_c);
    s.lstm.b_o = zv(m.lstm.b_o);
    s.w_dense = zm(m.w_dense);
    s.w_out = zm(m.w_out);
    s.b_dense = zv(m.b_dense);
    s.b_out = zv(m.b_out);
    s.word_emb = zm(m.word_emb);
    s.concept_emb = zm(m.concept_emb);
    s.deprel_emb = zm(m.deprel_emb);
    s.pos_emb = zm(m.pos_emb);
    return s;
}

void rms_step(Eigen::MatrixXd& param, Eigen::MatrixXd& cache, const Eigen::MatrixXd& g,
              const RelexHyper& h) {
    cache.array() = h.decay * cache.array() + (1.0 - h.decay) * g.array().square();
    param.array() -= h.learning_rate * g.array() / (cache.array().sqrt() + h.epsilon);
}

void rms_step(Eigen::VectorXd& param, Eigen::VectorXd& cache, const Eigen::VectorXd& g,
              const RelexHyper& h) {
    cache.array() = h.decay * cache.array() + (1.0 - h.decay) * g.array().square();
    param.array() -= h.learning_rate * g.array() / (cache.array().sqrt() + h.epsilon);
}

void rms_step_rows(Eigen::MatrixXd& param, Eigen::MatrixXd& cache,
                   const std::map<int, Eigen::VectorXd>& rows, const RelexHyper& h) {
    for (const auto& [r, g] : rows) {
        Eigen::ArrayXd c = cache.row(r).transpose().array();
        const Eigen::ArrayXd ga = g.array();
        c = h.decay * c + (1.0 - h.decay) * ga.square();
        cache.row(r) = c.matrix().transpose();
        param.row(r) -= (h.learning_rate * ga / (c.sqrt() + h.epsilon)).matrix().transpose();
    }
}

}  // namespace

RelexModel train_relex(const std::vector<SdpInstance>& instances, const RelexHyper& hyper,
                       const WordVectors* pretrained, RelexTrainLog* log) {
    RelexTrainLog local_log;
    RelexTrainLog& tl = log != nullptr ? *log : local_log;
    tl = RelexTrainLog{};

    RelexModel m = init_relex_model(instances, hyper, pretrained);
    RmsState rms = zero_rms(m);
    Rng rng(derive_seed(m.hyper.seed, 1));

    std::vector<std::size_t> order(instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    RelexGradients g;
    for (int epoch = 0; epoch < m.hyper.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const SdpInstance& inst = instances[order[pos]];
            Eigen::VectorXd mask;
            const Eigen::VectorXd* mp = nullptr;
            if (m.hyper.dropout > 0.0) {
                mask = make_dropout_mask(m.hyper.hidden_size, m.hyper.dropout, rng);
                mp = &mask;
            }
            const double loss = relex_loss_and_grads(m, inst, &g, mp);
            if (!std::isfinite(loss))
                throw NumericError("non-finite relation loss at epoch " +
                                   std::to_string(epoch + 1) + ", instance " +
                                   std::to_string(pos + 1));
            loss_sum += loss;

            rms_step(m.lstm.w_f, rms.lstm.w_f, g.lstm.w_f, m.hyper);
            rms_step(m.lstm.w_i, rms.lstm.w_i, g.lstm.w_i, m.hyper);
            rms_step(m.lstm.w_c, rms.lstm.w_c, g.lstm.w_c, m.hyper);
            rms_step(m.lstm.w_o, rms.lstm.w_o, g.lstm.w_o, m.hyper);
            rms_step(m.lstm.b_f, rms.lstm.b_f, g.lstm.b_f, m.hyper);
            rms_step(m.lstm.b_i, rms.lstm.b_i, g.lstm.b_i, m.hyper);
            rms_step(m.lstm.b_c, rms.lstm.b_c, g.lstm.b_c, m.hyper);
            rms_step(m.lstm.b_o, rms.lstm.b_o, g.lstm.b_o, m.hyper);
            rms_step(m.w_dense, rms.w_dense, g.w_dense, m.hyper);
            rms_step(m.b_dense, rms.b_dense, g.b_dense, m.hyper);
            rms_step(m.w_out, rms.w_out, g.w_out, m.hyper);
            rms_step(m.b_out, rms.b_out, g.b_out, m.hyper);
            rms_step_rows(m.word_emb, rms.word_emb, g.word_rows, m.hyper);
            rms_step_rows(m.concept_emb, rms.concept_emb, g.concept_rows, m.hyper);
            rms_step_rows(m.deprel_emb, rms.deprel_emb, g.deprel_rows, m.hyper);
            rms_step_rows(m.pos_emb, rms.pos_emb, g.pos_rows, m.hyper);
        }
        tl.epoch_loss.push_back(loss_sum / static_cast<double>(instances.size()));

        long correct = 0;
        for (const SdpInstance& inst : instances)
            if (predict_relation(m, inst).label == inst.label) ++correct;
        tl.epoch_accuracy.push_back(static_cast<double>(correct) /
                                    static_cast<double>(instances.size()));
    }
    return m;
}

RelexPrediction predict_relation(const RelexModel& m, const SdpInstance& inst) {
    const RelexForward fw = relex_forward(m, inst, nullptr);
    RelexPrediction p;
    p.probs = fw.probs;
    p.label_index = 0;
    for (int k = 1; k < kRelationCount; ++k)
        if (fw.probs(k) > fw.probs(p.label_index)) p.label_index = k;
    p.label = kRelationLabels[static_cast<std::size_t>(p.label_index)];
    return p;
}

namespace {

WordVectors load_text_vectors(std::ifstream& in, const std::string& path) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": missing header line");
    std::istringstream hs(header);
    long count = 0;
    int dim = 0;
    if (!(hs >> count >> dim) || count < 0 || dim <= 0)
        throw ParseError(path + ": bad header \"" + header + "\"");

    WordVectors wv;
    wv.dim = dim;
    std::vector<Eigen::VectorXd> rows;
    std::string line;
    long entries = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        Eigen::VectorXd v(dim);
        for (int d = 0; d < dim; ++d)
            if (!(ls >> v(d)))
                throw ParseError(path + ": line " + std::to_string(lineno) +
                                 " has fewer than " + std::to_string(dim) + " values");
        double extra;
        if (ls >> extra)
            throw ParseError(path + ": line " + std::to_string(lineno) +
                             " has more than " + std::to_string(dim) + " values");
        ++entries;
        if (wv.vocab.contains(word)) {
            ++wv.duplicates_dropped;
            continue;
        }
        wv.vocab.add(word);
        rows.push_back(std::move(v));
    }
    if (entries != count)
        throw ParseError(path + ": header promises " + std::to_string(count) +
                         " entries, file has " + std::to_string(entries));
    wv.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r)
        wv.vectors.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    return wv;
}

WordVectors load_binary_vectors(std::ifstream& in, const std::string& path) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": missing header line");
    std::istringstream hs(header);
    long count = 0;
    int dim = 0;
    if (!(hs >> count >> dim) || count < 0 || dim <= 0)
        throw ParseError(path + ": bad header \"" + header + "\"");

    WordVectors wv;
    wv.dim = dim;
    std::vector<Eigen::VectorXd> rows;
    for (long e = 0; e < count; ++e) {
        int ch = in.get();
        while (ch == '\n' || ch == '\r' || ch == ' ') ch = in.get();
        std::string word;
        while (ch != ' ' && ch != EOF) {
            word.push_back(static_cast<char>(ch));
            ch = in.get();
        }
        if (ch == EOF)
            throw ParseError(path + ": truncated at entry " + std::to_string(e + 1));
        Eigen::VectorXd v(dim);
        for (int d = 0; d < dim; ++d) {
            unsigned char b[4];
            in.read(reinterpret_cast<char*>(b), 4);
            if (!in)
                throw ParseError(path + ": truncated at entry " + std::to_string(e + 1));
            std::uint32_t bits = 0;
            for (int k = 3; k >= 0; --k) bits = (bits << 8) | b[k];
            float f;
            std::memcpy(&f, &bits, 4);
            v(d) = static_cast<double>(f);
        }
        if (wv.vocab.contains(word)) {
            ++wv.duplicates_dropped;
            continue;
        }
        wv.vocab.add(word);
        rows.push_back(std::move(v));
    }
    wv.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r)
        wv.vectors.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    return wv;
}

}  // namespace

WordVectors load_word_vectors(const std::string& path, VectorFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return format == VectorFormat::Text ? load_text_vectors(in, path)
                                        : load_binary_vectors(in, path);
}

void save_relex_model(std::ostream& out, const RelexModel& m) {
    out.write(kMagic, static_cast<std::streamsize>(std::string(kMagic).size()));
    io::write_u32(out, kFormatVersion);
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.epochs));
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.hidden_size));
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.dense_size));
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.word_dim));
    io::write_u32(out, static_cast<std::uint32_t>(m.hyper.feat_dim));
    io::write_f64(out, m.hyper.learning_rate);
    io::write_f64(out, m.hyper.decay);
    io::write_f64(out, m.hyper.epsilon);
    io::write_f64(out, m.hyper.dropout);
    io::write_u64(out, m.hyper.seed);
    m.words.save(out);
    m.deprels.save(out);
    m.pos_tags.save(out);
    io::write_matrix(out, m.word_emb);
    io::write_matrix(out, m.concept_emb);
    io::write_matrix(out, m.deprel_emb);
    io::write_matrix(out, m.pos_emb);
    io::write_matrix(out, m.lstm.w_f);
    io::write_vector(out, m.lstm.b_f);
    io::write_matrix(out, m.lstm.w_i);
    io::write_vector(out, m.lstm.b_i);
    io::write_matrix(out, m.lstm.w_c);
    io::write_vector(out, m.lstm.b_c);
    io::write_matrix(out, m.lstm.w_o);
    io::write_vector(out, m.lstm.b_o);
    io::write_matrix(out, m.w_dense);
    io::write_vector(out, m.b_dense);
    io::write_matrix(out, m.w_out);
    io::write_vector(out, m.b_out);
}

RelexModel load_relex_model(std::istream& in) {
    io::expect_magic(in, kMagic);
    const std::uint32_t version = io::read_u32(in);
    if (version != kFormatVersion)
        throw ParseError("unsupported relation model version " + std::to_string(version));
    RelexModel m;
    m.hyper.epochs = static_cast<int>(io::read_u32(in));
    m.hyper.hidden_size = static_cast<int>(io::read_u32(in));
    m.hyper.dense_size = static_cast<int>(io::read_u32(in));
    m.hyper.word_dim = static_cast<int>(io::read_u32(in));
    m.hyper.feat_dim = static_cast<int>(io::read_u32(in));
    m.hyper.learning_rate = io::read_f64(in);
    m.hyper.decay = io::read_f64(in);
    m.hyper.epsilon = io::read_f64(in);
    m.hyper.dropout = io::read_f64(in);
    m.hyper.seed = io::read_u64(in);
    m.words = Vocabulary::load(in);
    m.deprels = Vocabulary::load(in);
    m.pos_tags = Vocabulary::load(in);
    m.word_emb = io::read_matrix(in);
    m.concept_emb = io::read_matrix(in);
    m.deprel_emb = io::read_matrix(in);
    m.pos_emb = io::read_matrix(in);
    m.lstm.w_f = io::read_matrix(in);
    m.lstm.b_f = io::read_vector(in);
    m.lstm.w_i = io::read_matrix(in);
    m.lstm.b_i = io::read_vector(in);
    m.lstm.w_c = io::read_matrix(in);
    m.lstm.b_c = io::read_vector(in);
    m.lstm.w_o = io::read_matrix(in);
    m.lstm.b_o = io::read_vector(in);
    m.w_dense = io::read_matrix(in);
    m.b_dense = io::read_vector(in);
    m.w_out = io::read_matrix(in);
    m.b_out = io::read_vector(in);
    return m;
}

void save_relex_model(const std::string& path, const RelexModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    save_relex_model(out, m);
}

RelexModel load_relex_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return load_relex_model(in);
}

}  // namespace sdprelex
