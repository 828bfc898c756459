#include "sdprelex/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace sdprelex {

namespace {

ClassMetrics make_metrics(long tp, long fp, long fn) {
    ClassMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    if (tp + fp == 0 && tp + fn == 0) {
        m.degenerate = true;
        return m;
    }
    m.precision = tp + fp > 0 ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

}  // namespace

EvalReport prf1(const Confusion& confusion) {
    EvalReport rep;
    rep.confusion = confusion;
    long total = 0;
    long diag = 0;
    for (int g = 0; g < kRelationCount; ++g)
        for (int p = 0; p < kRelationCount; ++p) {
            const long n = confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
            if (n < 0) throw StructureError("negative confusion-matrix count");
            total += n;
            if (g == p) diag += n;
        }
    rep.instances = total;

    for (int c = 0; c < kRelationCount; ++c) {
        const long tp = confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        long fp = 0, fn = 0;
        for (int k = 0; k < kRelationCount; ++k) {
            if (k == c) continue;
            fp += confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
            fn += confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
        }
        rep.per_class[static_cast<std::size_t>(c)] = make_metrics(tp, fp, fn);
    }

    rep.micro_all = make_metrics(diag, total - diag, total - diag);
    long tp = 0, fp = 0, fn = 0;
    for (int c = 0; c < kNoneIndex; ++c) {
        tp += rep.per_class[static_cast<std::size_t>(c)].tp;
        fp += rep.per_class[static_cast<std::size_t>(c)].fp;
        fn += rep.per_class[static_cast<std::size_t>(c)].fn;
    }
    rep.micro_relations = make_metrics(tp, fp, fn);
    double f1_sum = 0.0;
    for (int c = 0; c < kNoneIndex; ++c)
        f1_sum += rep.per_class[static_cast<std::size_t>(c)].f1;
    rep.macro_f1 = f1_sum / static_cast<double>(kNoneIndex);
    return rep;
}

namespace {

std::string fixed4(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << v;
    return out.str();
}

void metrics_row(std::ostream& out, const std::string& kind, const std::string& label,
                 const ClassMetrics& m) {
    out << kind << '\t' << label << '\t' << fixed4(m.precision) << '\t'
        << fixed4(m.recall) << '\t' << fixed4(m.f1) << '\t' << m.tp << '\t' << m.fp
        << '\t' << m.fn << '\t' << m.support() << '\t' << (m.degenerate ? 1 : 0)
        << '\n';
}

}  // namespace

void write_report_tsv(std::ostream& out, const EvalReport& report) {
    out << "# metrics\n";
    out << "kind\tlabel\tprecision\trecall\tf1\ttp\tfp\tfn\tsupport\tdegenerate\n";
    for (int c = 0; c < kRelationCount; ++c)
        metrics_row(out, "class", kRelationLabels[static_cast<std::size_t>(c)],
                    report.per_class[static_cast<std::size_t>(c)]);
    metrics_row(out, "micro", "ALL", report.micro_all);
    metrics_row(out, "micro", "RELATIONS", report.micro_relations);

    out << "# confusion\n";
    out << "gold";
    for (const char* l : kRelationLabels) out << '\t' << l;
    out << '\n';
    for (int g = 0; g < kRelationCount; ++g) {
        out << kRelationLabels[static_cast<std::size_t>(g)];
        for (int p = 0; p < kRelationCount; ++p)
            out << '\t' << report.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
        out << '\n';
    }

    if (!report.fold_scores.empty()) {
        out << "# folds\n";
        out << "fold\tmicro_relations_f1\n";
        for (std::size_t f = 0; f < report.fold_scores.size(); ++f)
            out << f + 1 << '\t' << fixed4(report.fold_scores[f]) << '\n';
    }

    out << "# summary\n";
    out << "instances\t" << report.instances << '\n';
    out << "macro_f1\t" << fixed4(report.macro_f1) << '\n';
}

namespace {

nlohmann::json metrics_json(const ClassMetrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall},   {"f1", m.f1},
            {"tp", m.tp},               {"fp", m.fp},           {"fn", m.fn},
            {"support", m.support()},   {"degenerate", m.degenerate}};
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["instances"] = report.instances;
    j["per_class"] = nlohmann::json::array();
    for (int c = 0; c < kRelationCount; ++c) {
        nlohmann::json e = metrics_json(report.per_class[static_cast<std::size_t>(c)]);
        e["label"] = kRelationLabels[static_cast<std::size_t>(c)];
        j["per_class"].push_back(e);
    }
    j["micro_all"] = metrics_json(report.micro_all);
    j["micro_relations"] = metrics_json(report.micro_relations);
    j["macro_f1"] = report.macro_f1;
    j["confusion"] = nlohmann::json::array();
    for (int g = 0; g < kRelationCount; ++g) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < kRelationCount; ++p)
            row.push_back(report.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)]);
        j["confusion"].push_back(row);
    }
    j["fold_scores"] = report.fold_scores;
    return j.dump(2);
}

FoldPlan make_folds(int n_items, int k, std::uint64_t seed) {
    if (k < 2) throw StructureError("fold count must be at least 2");
    if (n_items < k)
        throw StructureError("more folds than items: k=" + std::to_string(k) +
                             ", items=" + std::to_string(n_items));
    std::vector<int> idx(static_cast<std::size_t>(n_items));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    FoldPlan plan;
    plan.k = k;
    plan.assignment.assign(static_cast<std::size_t>(n_items), 0);
    plan.folds.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const int fold = static_cast<int>(i % static_cast<std::size_t>(k));
        plan.assignment[static_cast<std::size_t>(idx[i])] = fold;
        plan.folds[static_cast<std::size_t>(fold)].push_back(idx[i]);
    }
    for (auto& f : plan.folds) std::sort(f.begin(), f.end());
    return plan;
}

AnnotatedDocument load_annotated_document(const std::string& dir, const std::string& id) {
    namespace fs = std::filesystem;
    AnnotatedDocument a;
    a.doc = load_document(dir, id);
    const std::string path = (fs::path(dir) / (id + ".conllu")).string();
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    a.trees = read_conllu(in);
    a.trees.source_path = path;
    if (a.trees.sentences.size() != a.doc.sentences.size())
        throw StructureError(id + ": " + std::to_string(a.doc.sentences.size()) +
                             " text lines but " + std::to_string(a.trees.sentences.size()) +
                             " trees");
    for (std::size_t i = 0; i < a.doc.sentences.size(); ++i) {
        const auto& toks = a.doc.sentences[i];
        const DepSentence& s = a.trees.sentences[i];
        if (static_cast<int>(toks.size()) != s.size())
            throw StructureError(id + ": line " + std::to_string(i + 1) + " has " +
                                 std::to_string(toks.size()) + " tokens but its tree has " +
                                 std::to_string(s.size()));
        for (std::size_t t = 0; t < toks.size(); ++t)
            if (toks[t] != s.token(static_cast<int>(t) + 1).form)
                throw StructureError(id + ": line " + std::to_string(i + 1) + " token " +
                                     std::to_string(t) + " is \"" + toks[t] +
                                     "\" but the tree has \"" +
                                     s.token(static_cast<int>(t) + 1).form + "\"");
    }
    return a;
}

std::vector<AnnotatedDocument> load_annotated_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ParseError("not a directory: " + dir);
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
    std::vector<AnnotatedDocument> docs;
    docs.reserve(ids.size());
    for (const std::string& id : ids) docs.push_back(load_annotated_document(dir, id));
    return docs;
}

ExtractedInstances extract_instances(const AnnotatedDocument& adoc,
                                     const ParserModel* parser, CandidateStats* stats) {
    ExtractedInstances out;
    out.candidates = generate_candidates(adoc.doc, &out.stats);
    if (stats != nullptr) {
        stats->pairs += out.stats.pairs;
        stats->labeled += out.stats.labeled;
        stats->overlapping_skipped += out.stats.overlapping_skipped;
        stats->duplicates_merged += out.stats.duplicates_merged;
    }

    struct LineTree {
        DepSentence tree;
        UndirectedDepGraph graph;
    };
    std::map<int, LineTree> cache;
    for (const RelationCandidate& c : out.candidates) {
        auto it = cache.find(c.sentence_line);
        if (it == cache.end()) {
            if (c.sentence_line < 1 ||
                c.sentence_line > static_cast<int>(adoc.trees.sentences.size()))
                throw StructureError(adoc.doc.id + ": no tree for line " +
                                     std::to_string(c.sentence_line));
            const DepSentence& gold =
                adoc.trees.sentences[static_cast<std::size_t>(c.sentence_line - 1)];
            LineTree lt;
            lt.tree = parser != nullptr ? parse(*parser, gold) : gold;
            lt.graph = build_undirected_graph(lt.tree);
            it = cache.emplace(c.sentence_line, std::move(lt)).first;
        }
        const LineTree& lt = it->second;
        const std::vector<int> path = shortest_path(lt.graph, c.first, c.second, lt.tree);
        out.instances.push_back(make_instance(path, lt.tree, c.first, c.second, c.label));
    }
    return out;
}

CrossvalResult crossval(const std::vector<AnnotatedDocument>& docs,
                        const ParserModel& parser, const CrossvalOptions& opts) {
    CrossvalResult res;
    res.plan = make_folds(static_cast<int>(docs.size()), opts.folds,
                          derive_seed(opts.seed, 0));

    std::vector<ExtractedInstances> per_doc;
    per_doc.reserve(docs.size());
    for (const AnnotatedDocument& d : docs)
        per_doc.push_back(extract_instances(d, &parser, &res.stats));

    Confusion pooled{};
    for (int f = 0; f < res.plan.k; ++f) {
        std::vector<SdpInstance> train;
        for (std::size_t d = 0; d < docs.size(); ++d)
            if (res.plan.assignment[d] != f)
                train.insert(train.end(), per_doc[d].instances.begin(),
                             per_doc[d].instances.end());
        if (train.empty())
            throw StructureError("fold " + std::to_string(f + 1) +
                                 " has no training candidates");
        RelexHyper hyper = opts.relex;
        hyper.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(1 + f));
        const RelexModel model = train_relex(train, hyper, opts.pretrained);

        Confusion cm{};
        for (int d : res.plan.folds[static_cast<std::size_t>(f)])
            for (const SdpInstance& inst : per_doc[static_cast<std::size_t>(d)].instances) {
                const int gold = relation_label_index(inst.label);
                const int pred = predict_relation(model, inst).label_index;
                ++cm[static_cast<std::size_t>(gold)][static_cast<std::size_t>(pred)];
            }
        res.fold_reports.push_back(prf1(cm));
        for (int g = 0; g < kRelationCount; ++g)
            for (int p = 0; p < kRelationCount; ++p)
                pooled[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)] +=
                    cm[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
    }

    res.pooled = prf1(pooled);
    double sum = 0.0;
    for (const EvalReport& rep : res.fold_reports) {
        res.pooled.fold_scores.push_back(rep.micro_relations.f1);
        sum += rep.micro_relations.f1;
    }
    res.mean_micro_f1 = sum / static_cast<double>(res.fold_reports.size());
    return res;
}

namespace {

// Continued-fraction evaluation of the incomplete beta function (modified
// Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

// Regularized incomplete beta I_x(a, b).
double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_sf(double t, int df) {
    if (df < 1) throw StructureError("degrees of freedom must be positive");
    if (std::isnan(t)) throw NumericError("t statistic is NaN");
    if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
    const double x = df / (df + t * t);
    const double tail = 0.5 * ibeta(0.5 * df, 0.5, x);
    return t >= 0.0 ? tail : 1.0 - tail;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw StructureError("paired score lists differ in length: " +
                             std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    const std::size_t k = a.size();
    if (k < 2) throw StructureError("paired t-test needs at least two scores");

    double mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double dev = (a[i] - b[i]) - mean;
        ss += dev * dev;
    }
    if (ss == 0.0)
        throw NumericError("degenerate paired t-test: zero-variance differences");

    TTestResult r;
    r.df = static_cast<int>(k) - 1;
    const double sd = std::sqrt(ss / static_cast<double>(r.df));
    r.t = mean / (sd / std::sqrt(static_cast<double>(k)));
    r.p = student_t_sf(r.t, r.df);
    return r;
}

namespace {

struct TemplateSpec {
    const char* label;
    const char* marker;
    ConceptType first_type;
    ConceptType second_type;
};

constexpr std::array<TemplateSpec, 9> kSynthTemplates = {{
    {"TrIP", "improves", ConceptType::Treatment, ConceptType::Problem},
    {"TrWP", "worsens", ConceptType::Treatment, ConceptType::Problem},
    {"TrCP", "complicates", ConceptType::Treatment, ConceptType::Problem},
    {"TrAP", "manages", ConceptType::Treatment, ConceptType::Problem},
    {"TrNAP", "bypasses", ConceptType::Treatment, ConceptType::Problem},
    {"TeRP", "reveals", ConceptType::Test, ConceptType::Problem},
    {"TeCP", "investigates", ConceptType::Test, ConceptType::Problem},
    {"PIP", "indicates", ConceptType::Problem, ConceptType::Problem},
    {"NONE", "accompanies", ConceptType::Treatment, ConceptType::Problem},
}};

const std::vector<std::string>& lexicon(ConceptType t) {
    static const std::vector<std::string> problems = {
        "hematoma", "pneumonia", "fibrillation", "hypertension",
        "anemia",   "sepsis",    "edema",        "rash"};
    static const std::vector<std::string> treatments = {
        "amiodarone", "aspirin", "warfarin", "insulin",
        "lisinopril", "heparin", "steroids", "antibiotics"};
    static const std::vector<std::string> tests = {
        "biopsy",           "xray", "mri",        "cultures",
        "echocardiogram",   "ekg",  "ultrasound", "labs"};
    switch (t) {
        case ConceptType::Problem: return problems;
        case ConceptType::Treatment: return treatments;
        case ConceptType::Test: return tests;
    }
    return problems;
}

DepSentence template_tree(const std::string& x, const std::string& marker,
                          const std::string& y) {
    static constexpr std::array<const char*, 6> pos = {"DT", "NN", "VBZ",
                                                       "DT", "NN", "."};
    static constexpr std::array<int, 6> heads = {2, 3, 0, 5, 3, 3};
    static constexpr std::array<const char*, 6> deprels = {"det",  "nsubj", "root",
                                                           "det",  "obj",   "punct"};
    const std::array<std::string, 6> forms = {"the", x, marker, "the", y, "."};
    DepSentence s;
    for (int i = 0; i < 6; ++i) {
        Token t;
        t.index = i + 1;
        t.form = forms[static_cast<std::size_t>(i)];
        t.pos = pos[static_cast<std::size_t>(i)];
        t.head = heads[static_cast<std::size_t>(i)];
        t.deprel = deprels[static_cast<std::size_t>(i)];
        s.tokens.push_back(std::move(t));
    }
    return s;
}

}  // namespace

SynthCorpus generate_synthetic_corpus(const SynthOptions& opts) {
    if (opts.documents <= 0) throw StructureError("document count must be positive");
    SynthCorpus corpus;
    Rng rng(opts.seed);
    int width = 1;
    for (int n = opts.documents; n >= 10; n /= 10) ++width;
    if (width < 3) width = 3;

    for (int d = 0; d < opts.documents; ++d) {
        AnnotatedDocument a;
        std::ostringstream id;
        id << "synth-" << std::setw(width) << std::setfill('0') << d + 1;
        a.doc.id = id.str();

        for (std::size_t t = 0; t < kSynthTemplates.size(); ++t) {
            const TemplateSpec& tpl = kSynthTemplates[t];
            const int line = static_cast<int>(t) + 1;
            const auto& lex1 = lexicon(tpl.first_type);
            const auto& lex2 = lexicon(tpl.second_type);
            const std::string x = lex1[rng.uniform_int(lex1.size())];
            std::string y = lex2[rng.uniform_int(lex2.size())];
            while (&lex1 == &lex2 && y == x) y = lex2[rng.uniform_int(lex2.size())];

            a.doc.sentences.push_back({"the", x, tpl.marker, "the", y, "."});
            DepSentence tree = template_tree(x, tpl.marker, y);
            a.trees.sentences.push_back(tree);
            corpus.combined.sentences.push_back(std::move(tree));

            ConceptSpan c1{line, 1, 1, tpl.first_type, x};
            ConceptSpan c2{line, 4, 4, tpl.second_type, y};
            a.doc.concepts.push_back(c1);
            a.doc.concepts.push_back(c2);
            if (std::string(tpl.label) != "NONE")
                a.doc.relations.push_back({tpl.label, c1, c2});
        }
        corpus.docs.push_back(std::move(a));
    }
    return corpus;
}

void write_synthetic_corpus(const SynthCorpus& corpus, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [](const std::string& path) {
        std::ofstream out(path);
        if (!out) throw ParseError("cannot open " + path + " for writing");
        return out;
    };

    for (const AnnotatedDocument& a : corpus.docs) {
        write_document(a.doc, dir);
        std::ofstream out = open((fs::path(dir) / (a.doc.id + ".conllu")).string());
        write_conllu(a.trees, out);
    }
    std::ofstream out = open((fs::path(dir) / "treebank.conllu").string());
    write_conllu(corpus.combined, out);
}

}  // namespace sdprelex
