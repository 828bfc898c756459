#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdprelex/corpus.hpp"
#include "sdprelex/parser.hpp"
#include "sdprelex/relex.hpp"

namespace sdprelex {

struct ClassMetrics {
    long tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;  // percentages
    bool degenerate = false;  // nothing predicted and nothing gold
    long support() const { return tp + fn; }
};

using Confusion = std::array<std::array<long, kRelationCount>, kRelationCount>;

struct EvalReport {
    Confusion confusion{};  // [gold][predicted]
    std::array<ClassMetrics, kRelationCount> per_class;
    ClassMetrics micro_all;        // over all classes (equals accuracy)
    ClassMetrics micro_relations;  // NONE excluded, the headline score
    double macro_f1 = 0.0;         // unweighted mean over the 8 relation classes
    long instances = 0;
    std::vector<double> fold_scores;  // micro_relations F1 per fold (crossval)
};

EvalReport prf1(const Confusion& confusion);

void write_report_tsv(std::ostream& out, const EvalReport& report);
std::string report_to_json(const EvalReport& report);

struct FoldPlan {
    int k = 0;
    std::vector<int> assignment;           // item index -> fold
    std::vector<std::vector<int>> folds;   // fold -> item indices
};

// Seeded shuffle then round-robin; fold sizes differ by at most one.
FoldPlan make_folds(int n_items, int k, std::uint64_t seed);

// A document paired with one tree per text line; trees supply the POS tags
// (and, when used directly, the dependencies) for the pipeline.
struct AnnotatedDocument {
    Document doc;
    Treebank trees;
};

AnnotatedDocument load_annotated_document(const std::string& dir, const std::string& id);
std::vector<AnnotatedDocument> load_annotated_corpus(const std::string& dir);

// Candidate pairs of one document with their path instances, extracted from
// parsed trees (or the document's own trees when parser is null).
struct ExtractedInstances {
    std::vector<RelationCandidate> candidates;
    std::vector<SdpInstance> instances;  // aligned with candidates
    CandidateStats stats;
};

ExtractedInstances extract_instances(const AnnotatedDocument& adoc,
                                     const ParserModel* parser,
                                     CandidateStats* stats = nullptr);

struct CrossvalOptions {
    int folds = 5;
    std::uint64_t seed = 1;
    RelexHyper relex;
    const WordVectors* pretrained = nullptr;
};

struct CrossvalResult {
    FoldPlan plan;
    std::vector<EvalReport> fold_reports;
    EvalReport pooled;           // held-out predictions pooled over folds
    double mean_micro_f1 = 0.0;  // unweighted mean of fold micro_relations F1
    CandidateStats stats;
};

CrossvalResult crossval(const std::vector<AnnotatedDocument>& docs,
                        const ParserModel& parser, const CrossvalOptions& opts);

struct TTestResult {
    double t = 0.0;
    double p = 0.0;  // one-sided, P(T_df > t)
    int df = 0;
};

// Paired t statistic over per-fold differences a - b, df = k - 1.
// Zero-variance differences are degenerate and rejected.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

// One-sided tail P(T_df > t) via the regularized incomplete beta function.
double student_t_sf(double t, int df);

struct SynthOptions {
    int documents = 20;
    std::uint64_t seed = 7;
};

struct SynthCorpus {
    std::vector<AnnotatedDocument> docs;
    Treebank combined;  // every sentence, for parser training
};

// Template sentences whose marker verb determines the relation label, so a
// correct pipeline can reach 100%; trees are projective by construction.
SynthCorpus generate_synthetic_corpus(const SynthOptions& opts);
void write_synthetic_corpus(const SynthCorpus& corpus, const std::string& dir);

}  // namespace sdprelex
