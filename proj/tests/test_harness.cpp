#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sdprelex/corpus.hpp"
#include "sdprelex/errors.hpp"
#include "sdprelex/harness.hpp"
#include "sdprelex/parser.hpp"
#include "sdprelex/relex.hpp"
#include "sdprelex/rng.hpp"
#include "sdprelex/treebank.hpp"
#include "support/gen.hpp"

using namespace sdprelex;

namespace {

Confusion zero_confusion() {
    Confusion c{};
    for (auto& row : c) row.fill(0);
    return c;
}

Confusion confusion_of(const std::vector<std::pair<int, int>>& pairs) {
    Confusion c = zero_confusion();
    for (const auto& [g, p] : pairs)
        ++c[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
    return c;
}

std::string conllu_string(const Treebank& tb) {
    std::ostringstream out;
    write_conllu(tb, out);
    return out.str();
}

// A one-sentence document with no concepts; extract_instances yields nothing.
AnnotatedDocument barren_document(const std::string& id) {
    AnnotatedDocument a;
    a.doc.id = id;
    a.doc.sentences.push_back({"the", "cat", "sleeps", "."});
    a.trees.sentences.push_back(testgen::sentence_of(
        {"the", "cat", "sleeps", "."}, {"DT", "NN", "VBZ", "."}, {2, 3, 0, 3},
        {"det", "nsubj", "root", "punct"}));
    return a;
}

RelexHyper tiny_hyper(std::uint64_t seed) {
    RelexHyper h;
    h.epochs = 3;
    h.hidden_size = 8;
    h.dense_size = 6;
    h.word_dim = 5;
    h.feat_dim = 4;
    h.dropout = 0.2;
    h.seed = seed;
    return h;
}

ParserModel tiny_trained_parser(const Treebank& tb) {
    ParserHyper h;
    h.epochs = 5;
    h.batch_size = 16;
    h.hidden_size = 16;
    h.embed_dim = 8;
    h.seed = 11;
    return train_parser(tb, h);
}

}  // namespace

TEST_CASE("prf1 on an all-diagonal confusion gives perfect scores") {
    Confusion c = zero_confusion();
    c[0][0] = 3;   // TrIP
    c[5][5] = 2;   // TeRP
    c[8][8] = 4;   // NONE
    EvalReport rep = prf1(c);

    CHECK(rep.instances == 9);
    CHECK(rep.per_class[0].precision == doctest::Approx(100.0));
    CHECK(rep.per_class[0].recall == doctest::Approx(100.0));
    CHECK(rep.per_class[0].f1 == doctest::Approx(100.0));
    CHECK_FALSE(rep.per_class[0].degenerate);
    CHECK(rep.per_class[0].support() == 3);

    // Classes with no gold and no predicted instances are degenerate.
    CHECK(rep.per_class[1].degenerate);
    CHECK(rep.per_class[1].f1 == 0.0);

    CHECK(rep.micro_all.precision == doctest::Approx(100.0));
    CHECK(rep.micro_relations.tp == 5);
    CHECK(rep.micro_relations.fp == 0);
    CHECK(rep.micro_relations.fn == 0);
    CHECK(rep.micro_relations.f1 == doctest::Approx(100.0));
    // Two of the eight relation classes are perfect, six are degenerate zeros.
    CHECK(rep.macro_f1 == doctest::Approx(200.0 / 8.0));
}

TEST_CASE("prf1 worked example: tp=2 fp=2 fn=0 gives F1 66.67") {
    // Gold TrIP twice, predicted TrIP four times (two stolen from TeRP).
    Confusion c = zero_confusion();
    c[0][0] = 2;
    c[5][0] = 2;
    c[5][5] = 1;
    EvalReport rep = prf1(c);

    CHECK(rep.per_class[0].tp == 2);
    CHECK(rep.per_class[0].fp == 2);
    CHECK(rep.per_class[0].fn == 0);
    CHECK(rep.per_class[0].precision == doctest::Approx(50.0));
    CHECK(rep.per_class[0].recall == doctest::Approx(100.0));
    CHECK(rep.per_class[0].f1 == doctest::Approx(200.0 / 3.0).epsilon(1e-9));

    CHECK(rep.per_class[5].tp == 1);
    CHECK(rep.per_class[5].fp == 0);
    CHECK(rep.per_class[5].fn == 2);

    // micro over all classes is plain accuracy: 3 of 5 correct.
    CHECK(rep.micro_all.precision == doctest::Approx(60.0));
    CHECK(rep.micro_all.recall == doctest::Approx(60.0));
    CHECK(rep.instances == 5);
}

TEST_CASE("prf1 micro_relations ignores the NONE class") {
    // One relation recovered, one missed into NONE, one NONE overcalled as PIP.
    Confusion c = zero_confusion();
    c[3][3] = 1;                         // TrAP correct
    c[5][kNoneIndex] = 1;                // TeRP missed
    c[kNoneIndex][7] = 1;                // spurious PIP
    c[kNoneIndex][kNoneIndex] = 5;       // true negatives
    EvalReport rep = prf1(c);

    CHECK(rep.micro_relations.tp == 1);
    CHECK(rep.micro_relations.fn == 1);
    CHECK(rep.micro_relations.fp == 1);
    CHECK(rep.micro_relations.precision == doctest::Approx(50.0));
    CHECK(rep.micro_relations.recall == doctest::Approx(50.0));
    CHECK(rep.micro_relations.f1 == doctest::Approx(50.0));

    // NONE-vs-NONE cells only affect accuracy, never the relation micro.
    CHECK(rep.micro_all.precision == doctest::Approx(100.0 * 6.0 / 8.0));
    CHECK(rep.per_class[kNoneIndex].tp == 5);
}

TEST_CASE("prf1 rejects negative counts") {
    Confusion c = zero_confusion();
    c[2][4] = -1;
    CHECK_THROWS_AS(prf1(c), StructureError);
}

TEST_CASE("prf1 agrees with a direct recount over random prediction lists") {
    testgen::TempDir dir("prf1-fuzz");  // unused scratch, keeps pattern uniform
    Rng rng(515);
    for (int iter = 0; iter < 60; ++iter) {
        const int n = 1 + static_cast<int>(rng.uniform_int(40));
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < n; ++i)
            pairs.emplace_back(static_cast<int>(rng.uniform_int(kRelationCount)),
                               static_cast<int>(rng.uniform_int(kRelationCount)));
        EvalReport rep = prf1(confusion_of(pairs));
        CHECK(rep.instances == n);

        long correct = 0;
        for (const auto& [g, p] : pairs)
            if (g == p) ++correct;
        CHECK(rep.micro_all.tp == correct);
        CHECK(rep.micro_all.precision ==
              doctest::Approx(100.0 * static_cast<double>(correct) / n));

        for (int c = 0; c < kRelationCount; ++c) {
            long tp = 0, fp = 0, fn = 0;
            for (const auto& [g, p] : pairs) {
                if (g == c && p == c) ++tp;
                else if (g != c && p == c) ++fp;
                else if (g == c && p != c) ++fn;
            }
            const ClassMetrics& m = rep.per_class[static_cast<std::size_t>(c)];
            CHECK(m.tp == tp);
            CHECK(m.fp == fp);
            CHECK(m.fn == fn);
            if (tp + fp > 0) {
                CHECK(m.precision ==
                      doctest::Approx(100.0 * static_cast<double>(tp) / (tp + fp)));
            }
            if (tp + fn > 0) {
                CHECK(m.recall ==
                      doctest::Approx(100.0 * static_cast<double>(tp) / (tp + fn)));
            }
            CHECK(m.degenerate == (tp + fp == 0 && tp + fn == 0));
        }

        long rtp = 0, rfp = 0, rfn = 0;
        for (int c = 0; c < kNoneIndex; ++c) {
            rtp += rep.per_class[static_cast<std::size_t>(c)].tp;
            rfp += rep.per_class[static_cast<std::size_t>(c)].fp;
            rfn += rep.per_class[static_cast<std::size_t>(c)].fn;
        }
        CHECK(rep.micro_relations.tp == rtp);
        CHECK(rep.micro_relations.fp == rfp);
        CHECK(rep.micro_relations.fn == rfn);
    }
}

TEST_CASE("TSV report renders every section with fixed four-decimal numbers") {
    Confusion c = zero_confusion();
    c[0][0] = 2;
    c[5][0] = 2;
    c[5][5] = 1;
    EvalReport rep = prf1(c);

    std::ostringstream out;
    write_report_tsv(out, rep);
    const std::string text = out.str();

    CHECK(text.find("# metrics\n") != std::string::npos);
    CHECK(text.find("# confusion\n") != std::string::npos);
    CHECK(text.find("# summary\n") != std::string::npos);
    CHECK(text.find("# folds") == std::string::npos);  // no fold scores yet
    CHECK(text.find("kind\tlabel\tprecision\trecall\tf1\ttp\tfp\tfn\tsupport\tdegenerate\n") !=
          std::string::npos);
    CHECK(text.find("class\tTrIP\t50.0000\t100.0000\t66.6667\t2\t2\t0\t2\t0\n") !=
          std::string::npos);
    CHECK(text.find("class\tTrWP\t0.0000\t0.0000\t0.0000\t0\t0\t0\t0\t1\n") !=
          std::string::npos);
    CHECK(text.find("micro\tALL\t60.0000\t") != std::string::npos);
    CHECK(text.find("micro\tRELATIONS\t") != std::string::npos);
    CHECK(text.find("gold\tTrIP\tTrWP\tTrCP\tTrAP\tTrNAP\tTeRP\tTeCP\tPIP\tNONE\n") !=
          std::string::npos);
    CHECK(text.find("TeRP\t2\t0\t0\t0\t0\t1\t0\t0\t0\n") != std::string::npos);
    CHECK(text.find("instances\t5\n") != std::string::npos);

    rep.fold_scores = {87.5, 90.0};
    std::ostringstream out2;
    write_report_tsv(out2, rep);
    const std::string text2 = out2.str();
    CHECK(text2.find("# folds\nfold\tmicro_relations_f1\n1\t87.5000\n2\t90.0000\n") !=
          std::string::npos);
}

TEST_CASE("JSON report parses back with full metric detail") {
    Confusion c = zero_confusion();
    c[0][0] = 2;
    c[5][0] = 2;
    c[5][5] = 1;
    EvalReport rep = prf1(c);
    rep.fold_scores = {66.0, 70.0, 74.0};

    const nlohmann::json j = nlohmann::json::parse(report_to_json(rep));
    CHECK(j.at("instances").get<long>() == 5);
    CHECK(j.at("per_class").size() == static_cast<std::size_t>(kRelationCount));
    CHECK(j.at("per_class")[0].at("label").get<std::string>() == "TrIP");
    CHECK(j.at("per_class")[0].at("precision").get<double>() == doctest::Approx(50.0));
    CHECK(j.at("per_class")[0].at("support").get<long>() == 2);
    CHECK(j.at("per_class")[1].at("degenerate").get<bool>());
    CHECK(j.at("micro_all").at("precision").get<double>() == doctest::Approx(60.0));
    CHECK(j.at("micro_relations").at("tp").get<long>() == 3);
    CHECK(j.at("macro_f1").get<double>() == doctest::Approx(rep.macro_f1));
    CHECK(j.at("confusion").size() == static_cast<std::size_t>(kRelationCount));
    CHECK(j.at("confusion")[5][0].get<long>() == 2);
    CHECK(j.at("fold_scores").size() == 3);
    CHECK(j.at("fold_scores")[1].get<double>() == doctest::Approx(70.0));
}

TEST_CASE("make_folds partitions the items with near-equal fold sizes") {
    const FoldPlan plan = make_folds(23, 5, 99);
    CHECK(plan.k == 5);
    CHECK(plan.assignment.size() == 23);
    CHECK(plan.folds.size() == 5);

    std::set<int> seen;
    std::size_t min_size = 23, max_size = 0;
    for (int f = 0; f < 5; ++f) {
        const auto& fold = plan.folds[static_cast<std::size_t>(f)];
        CHECK(std::is_sorted(fold.begin(), fold.end()));
        min_size = std::min(min_size, fold.size());
        max_size = std::max(max_size, fold.size());
        for (int item : fold) {
            CHECK(seen.insert(item).second);  // each item in exactly one fold
            CHECK(plan.assignment[static_cast<std::size_t>(item)] == f);
        }
    }
    CHECK(seen.size() == 23);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 22);
    CHECK(max_size - min_size <= 1);
}

TEST_CASE("make_folds is seed-deterministic and seed-sensitive") {
    const FoldPlan a = make_folds(40, 4, 7);
    const FoldPlan b = make_folds(40, 4, 7);
    const FoldPlan c = make_folds(40, 4, 8);
    CHECK(a.assignment == b.assignment);
    CHECK(a.folds == b.folds);
    CHECK(a.assignment != c.assignment);
}

TEST_CASE("make_folds rejects degenerate requests") {
    CHECK_THROWS_AS(make_folds(10, 1, 1), StructureError);
    CHECK_THROWS_AS(make_folds(10, 0, 1), StructureError);
    CHECK_THROWS_AS(make_folds(3, 5, 1), StructureError);
}

TEST_CASE("student_t_sf matches reference tail probabilities") {
    // Reference values computed independently with SciPy's stats.t.sf.
    const struct {
        double t;
        int df;
        double want;
    } cases[] = {
        {2.0, 4, 5.805826175841e-02},
        {0.41611, 8, 3.441341193271e-01},
        {4.22267, 8, 1.452614694521e-03},
        {26.34559, 8, 2.315291544601e-09},
        {-0.41611, 8, 6.558658806729e-01},
        {1.0, 1, 0.25},
        {0.5, 30, 3.103615024426e-01},
        {14.142135623730951, 4, 7.256408530660e-05},
    };
    for (const auto& c : cases)
        CHECK(student_t_sf(c.t, c.df) == doctest::Approx(c.want).epsilon(1e-9));

    CHECK(student_t_sf(0.0, 7) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("student_t_sf handles edge inputs") {
    CHECK_THROWS_AS(student_t_sf(1.0, 0), StructureError);
    CHECK_THROWS_AS(student_t_sf(1.0, -3), StructureError);
    CHECK(student_t_sf(std::numeric_limits<double>::infinity(), 5) == 0.0);
    CHECK(student_t_sf(-std::numeric_limits<double>::infinity(), 5) == 1.0);
    CHECK_THROWS_AS(student_t_sf(std::numeric_limits<double>::quiet_NaN(), 5),
                    NumericError);

    // Symmetry of the t distribution around zero.
    Rng rng(44);
    for (int i = 0; i < 50; ++i) {
        const double t = rng.uniform(-6.0, 6.0);
        const int df = 1 + static_cast<int>(rng.uniform_int(40));
        CHECK(student_t_sf(t, df) + student_t_sf(-t, df) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("paired_t_test reproduces the worked five-fold example") {
    const std::vector<double> a = {2.1, 1.9, 2.0, 2.2, 1.8};
    const std::vector<double> b = {1.0, 1.0, 1.0, 1.0, 1.0};
    const TTestResult r = paired_t_test(a, b);
    // d = {1.1, 0.9, 1.0, 1.2, 0.8}: mean 1.0, sample sd 0.1581139,
    // t = 1.0 / (0.1581139 / sqrt(5)) = 14.1421356.
    CHECK(r.df == 4);
    CHECK(r.t == doctest::Approx(14.142135623730951).epsilon(1e-9));
    CHECK(r.p == doctest::Approx(7.256408530660e-05).epsilon(1e-9));
}

TEST_CASE("paired_t_test properties: sign flip and shift invariance") {
    const std::vector<double> a = {3.4, 2.8, 3.1, 3.6, 2.9, 3.3};
    const std::vector<double> b = {3.0, 2.9, 2.7, 3.1, 2.8, 2.6};
    const TTestResult fwd = paired_t_test(a, b);
    const TTestResult rev = paired_t_test(b, a);
    CHECK(rev.t == doctest::Approx(-fwd.t).epsilon(1e-12));
    CHECK(rev.p == doctest::Approx(1.0 - fwd.p).epsilon(1e-9));
    CHECK(rev.df == fwd.df);

    std::vector<double> a_shift = a, b_shift = b;
    for (double& v : a_shift) v += 17.25;
    for (double& v : b_shift) v += 17.25;
    const TTestResult shifted = paired_t_test(a_shift, b_shift);
    CHECK(shifted.t == doctest::Approx(fwd.t).epsilon(1e-9));
}

TEST_CASE("paired_t_test rejects malformed or degenerate input") {
    CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {1.0}), StructureError);
    CHECK_THROWS_AS(paired_t_test({1.0}, {0.5}), StructureError);
    CHECK_THROWS_AS(paired_t_test({}, {}), StructureError);
    // Constant difference vector has zero variance.
    CHECK_THROWS_AS(paired_t_test({2.0, 2.5, 3.0}, {1.0, 1.5, 2.0}), NumericError);
    CHECK_THROWS_AS(paired_t_test({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}), NumericError);
}

TEST_CASE("synthetic corpus has the documented shape") {
    SynthOptions opts;
    opts.documents = 4;
    opts.seed = 123;
    const SynthCorpus corpus = generate_synthetic_corpus(opts);

    REQUIRE(corpus.docs.size() == 4);
    CHECK(corpus.docs[0].doc.id == "synth-001");
    CHECK(corpus.docs[3].doc.id == "synth-004");
    CHECK(corpus.combined.sentences.size() == 4 * 9);

    for (const AnnotatedDocument& a : corpus.docs) {
        REQUIRE(a.doc.sentences.size() == 9);
        REQUIRE(a.trees.sentences.size() == 9);
        CHECK(a.doc.concepts.size() == 18);
        CHECK(a.doc.relations.size() == 8);  // the ninth sentence is unrelated

        std::vector<std::string> labels;
        for (const RelationRecord& r : a.doc.relations) labels.push_back(r.label);
        std::sort(labels.begin(), labels.end());
        std::vector<std::string> want = {"PIP",  "TeCP",  "TeRP", "TrAP",
                                         "TrCP", "TrIP",  "TrNAP", "TrWP"};
        CHECK(labels == want);

        for (const DepSentence& s : a.trees.sentences) {
            REQUIRE(s.tokens.size() == 6);
            CHECK_NOTHROW(validate_tree(s, "synth"));
            CHECK(is_projective(s));
        }
        // Tree forms mirror the text tokens line by line.
        for (std::size_t i = 0; i < 9; ++i)
            for (std::size_t t = 0; t < 6; ++t)
                CHECK(a.trees.sentences[i].tokens[t].form == a.doc.sentences[i][t]);
    }
}

TEST_CASE("synthetic corpus yields nine candidates per document, eight labeled") {
    SynthOptions opts;
    opts.documents = 3;
    opts.seed = 9;
    const SynthCorpus corpus = generate_synthetic_corpus(opts);
    for (const AnnotatedDocument& a : corpus.docs) {
        CandidateStats stats;
        const auto cands = generate_candidates(a.doc, &stats);
        CHECK(stats.pairs == 9);
        CHECK(stats.labeled == 8);
        CHECK(stats.overlapping_skipped == 0);
        REQUIRE(cands.size() == 9);
        int none = 0;
        for (const RelationCandidate& c : cands)
            if (c.label == "NONE") ++none;
        CHECK(none == 1);
    }
}

TEST_CASE("synthetic corpus generation is deterministic in the seed") {
    SynthOptions opts;
    opts.documents = 5;
    opts.seed = 31;
    const SynthCorpus a = generate_synthetic_corpus(opts);
    const SynthCorpus b = generate_synthetic_corpus(opts);
    opts.seed = 32;
    const SynthCorpus c = generate_synthetic_corpus(opts);

    REQUIRE(a.docs.size() == b.docs.size());
    bool all_equal = true;
    bool any_differs_from_c = false;
    for (std::size_t d = 0; d < a.docs.size(); ++d) {
        if (a.docs[d].doc.sentences != b.docs[d].doc.sentences) all_equal = false;
        if (a.docs[d].doc.sentences != c.docs[d].doc.sentences)
            any_differs_from_c = true;
    }
    CHECK(all_equal);
    CHECK(any_differs_from_c);
    CHECK(conllu_string(a.combined) == conllu_string(b.combined));
}

TEST_CASE("written synthetic corpus loads back unchanged") {
    testgen::TempDir dir("synth-roundtrip");
    SynthOptions opts;
    opts.documents = 3;
    opts.seed = 77;
    const SynthCorpus corpus = generate_synthetic_corpus(opts);
    write_synthetic_corpus(corpus, dir.str());

    const std::filesystem::path tb_path =
        std::filesystem::path(dir.str()) / "treebank.conllu";
    REQUIRE(std::filesystem::exists(tb_path));
    std::ifstream tb_in(tb_path);
    const Treebank combined = read_conllu(tb_in);
    CHECK(conllu_string(combined) == conllu_string(corpus.combined));

    const std::vector<AnnotatedDocument> loaded = load_annotated_corpus(dir.str());
    REQUIRE(loaded.size() == corpus.docs.size());
    for (std::size_t d = 0; d < loaded.size(); ++d) {
        CHECK(loaded[d].doc.id == corpus.docs[d].doc.id);
        CHECK(loaded[d].doc.sentences == corpus.docs[d].doc.sentences);
        CHECK(loaded[d].doc.concepts.size() == corpus.docs[d].doc.concepts.size());
        CHECK(loaded[d].doc.relations.size() == corpus.docs[d].doc.relations.size());
        CHECK(conllu_string(loaded[d].trees) == conllu_string(corpus.docs[d].trees));
    }
}

TEST_CASE("load_annotated_document checks tree and text alignment") {
    testgen::TempDir dir("annotated-errors");
    const std::filesystem::path root(dir.str());

    SynthOptions opts;
    opts.documents = 1;
    opts.seed = 5;
    const SynthCorpus corpus = generate_synthetic_corpus(opts);
    write_synthetic_corpus(corpus, dir.str());
    const std::string id = corpus.docs[0].doc.id;

    // Control: the untouched document loads.
    const AnnotatedDocument ok = load_annotated_document(dir.str(), id);
    CHECK(ok.trees.sentences.size() == 9);

    SUBCASE("missing conllu file") {
        std::filesystem::remove(root / (id + ".conllu"));
        CHECK_THROWS_AS(load_annotated_document(dir.str(), id), ParseError);
    }
    SUBCASE("sentence count mismatch") {
        Treebank short_tb;
        short_tb.sentences.assign(corpus.docs[0].trees.sentences.begin(),
                                  corpus.docs[0].trees.sentences.end() - 1);
        std::ofstream out(root / (id + ".conllu"));
        write_conllu(short_tb, out);
        out.close();
        CHECK_THROWS_AS(load_annotated_document(dir.str(), id), StructureError);
    }
    SUBCASE("token form mismatch") {
        Treebank tweaked = corpus.docs[0].trees;
        tweaked.sentences[2].tokens[1].form = "mismatch";
        std::ofstream out(root / (id + ".conllu"));
        write_conllu(tweaked, out);
        out.close();
        CHECK_THROWS_AS(load_annotated_document(dir.str(), id), StructureError);
    }
    SUBCASE("token count mismatch within a line") {
        Treebank tweaked = corpus.docs[0].trees;
        tweaked.sentences[0].tokens.pop_back();
        tweaked.sentences[0].tokens[2].head = 0;  // keep the tree valid
        std::ofstream out(root / (id + ".conllu"));
        write_conllu(tweaked, out);
        out.close();
        CHECK_THROWS_AS(load_annotated_document(dir.str(), id), StructureError);
    }
}

TEST_CASE("extract_instances with gold trees pairs candidates and paths") {
    SynthOptions opts;
    opts.documents = 1;
    opts.seed = 21;
    const SynthCorpus corpus = generate_synthetic_corpus(opts);

    CandidateStats stats;
    const ExtractedInstances ex = extract_instances(corpus.docs[0], nullptr, &stats);
    CHECK(stats.pairs == 9);
    REQUIRE(ex.candidates.size() == 9);
    REQUIRE(ex.instances.size() == 9);

    for (std::size_t i = 0; i < ex.instances.size(); ++i) {
        const SdpInstance& inst = ex.instances[i];
        CHECK(inst.label == ex.candidates[i].label);
        // Template path: endpoint, marker verb, endpoint.
        REQUIRE(inst.words.size() == 3);
        const int line = ex.candidates[i].sentence_line;
        const auto& sent = corpus.docs[0].doc.sentences[static_cast<std::size_t>(line - 1)];
        CHECK(inst.words[0] == sent[1]);
        CHECK(inst.words[1] == sent[2]);
        CHECK(inst.words[2] == sent[4]);
        CHECK(inst.pos[1] == "VBZ");
        CHECK(inst.concept_bio[1] == "O");
        CHECK(inst.concept_bio[0].rfind("B_", 0) == 0);
        CHECK(inst.concept_bio[2].rfind("B_", 0) == 0);
    }
}

TEST_CASE("extract_instances with a trained parser still covers every candidate") {
    SynthOptions opts;
    opts.documents = 2;
    opts.seed = 43;
    const SynthCorpus corpus = generate_synthetic_corpus(opts);
    const ParserModel parser = tiny_trained_parser(corpus.combined);

    const ExtractedInstances ex = extract_instances(corpus.docs[1], &parser);
    REQUIRE(ex.candidates.size() == 9);
    REQUIRE(ex.instances.size() == 9);
    for (const SdpInstance& inst : ex.instances) {
        CHECK(inst.words.size() >= 2);  // a parse may reroute, never drop, the path
        CHECK(inst.words.size() == inst.pos.size());
        CHECK(inst.words.size() == inst.concept_bio.size());
        CHECK(inst.words.size() == inst.deprels.size());
    }
}

TEST_CASE("crossval bookkeeping: folds, pooling and per-fold scores line up") {
    SynthOptions sopts;
    sopts.documents = 9;
    sopts.seed = 404;
    const SynthCorpus corpus = generate_synthetic_corpus(sopts);
    const ParserModel parser = tiny_trained_parser(corpus.combined);

    CrossvalOptions opts;
    opts.folds = 3;
    opts.seed = 5;
    opts.relex = tiny_hyper(1);
    const CrossvalResult res = crossval(corpus.docs, parser, opts);

    CHECK(res.plan.k == 3);
    CHECK(res.plan.assignment.size() == corpus.docs.size());
    REQUIRE(res.fold_reports.size() == 3);
    CHECK(res.pooled.instances == static_cast<long>(9 * corpus.docs.size()));
    CHECK(res.stats.pairs == static_cast<int>(9 * corpus.docs.size()));

    REQUIRE(res.pooled.fold_scores.size() == 3);
    double mean = 0.0;
    long fold_instances = 0;
    Confusion summed = zero_confusion();
    for (std::size_t f = 0; f < 3; ++f) {
        CHECK(res.pooled.fold_scores[f] ==
              doctest::Approx(res.fold_reports[f].micro_relations.f1).epsilon(1e-12));
        mean += res.fold_reports[f].micro_relations.f1;
        fold_instances += res.fold_reports[f].instances;
        for (int g = 0; g < kRelationCount; ++g)
            for (int p = 0; p < kRelationCount; ++p)
                summed[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)] +=
                    res.fold_reports[f]
                        .confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
    }
    CHECK(res.mean_micro_f1 == doctest::Approx(mean / 3.0).epsilon(1e-12));
    CHECK(fold_instances == res.pooled.instances);
    bool pooled_matches = true;
    for (int g = 0; g < kRelationCount; ++g)
        for (int p = 0; p < kRelationCount; ++p)
            if (summed[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)] !=
                res.pooled.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)])
                pooled_matches = false;
    CHECK(pooled_matches);

    // Every gold row total matches the corpus: 9 docs x 1 instance per class,
    // with NONE collecting one candidate per document.
    for (int g = 0; g < kRelationCount; ++g) {
        long row = 0;
        for (int p = 0; p < kRelationCount; ++p)
            row += res.pooled.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
        CHECK(row == static_cast<long>(corpus.docs.size()));
    }
}

TEST_CASE("crossval is reproducible end to end") {
    SynthOptions sopts;
    sopts.documents = 6;
    sopts.seed = 88;
    const SynthCorpus corpus = generate_synthetic_corpus(sopts);
    const ParserModel parser = tiny_trained_parser(corpus.combined);

    CrossvalOptions opts;
    opts.folds = 3;
    opts.seed = 17;
    opts.relex = tiny_hyper(2);
    const CrossvalResult a = crossval(corpus.docs, parser, opts);
    const CrossvalResult b = crossval(corpus.docs, parser, opts);

    CHECK(report_to_json(a.pooled) == report_to_json(b.pooled));
    CHECK(a.mean_micro_f1 == b.mean_micro_f1);
    CHECK(a.plan.assignment == b.plan.assignment);
    for (std::size_t f = 0; f < a.fold_reports.size(); ++f)
        CHECK(report_to_json(a.fold_reports[f]) == report_to_json(b.fold_reports[f]));
}

TEST_CASE("crossval refuses folds whose training half is empty") {
    std::vector<AnnotatedDocument> docs;
    docs.push_back(barren_document("empty-1"));
    docs.push_back(barren_document("empty-2"));

    Treebank tb;
    tb.sentences.push_back(docs[0].trees.sentences[0]);
    const ParserModel parser = tiny_trained_parser(tb);

    CrossvalOptions opts;
    opts.folds = 2;
    opts.seed = 3;
    opts.relex = tiny_hyper(1);
    CHECK_THROWS_AS(crossval(docs, parser, opts), StructureError);
}
