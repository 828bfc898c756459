// Command-line front end for the parsing / SDP / relation-extraction pipeline.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdprelex/harness.hpp"

namespace sx = sdprelex;

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sx::ParseError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw sx::ParseError("cannot open " + path + " for writing");
    return out;
}

std::vector<sx::SdpInstance> read_instances(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<sx::SdpInstance> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            out.push_back(sx::instance_from_line(line));
        } catch (const sx::ParseError& e) {
            throw sx::ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw sx::ParseError(path + ": no instances");
    return out;
}

std::vector<double> read_scores(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<double> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(line, &used);
        } catch (const std::exception&) {
            throw sx::ParseError(path + ":" + std::to_string(lineno) +
                                 ": not a number: \"" + line + "\"");
        }
        while (used < line.size() && (line[used] == ' ' || line[used] == '\t')) ++used;
        if (used != line.size())
            throw sx::ParseError(path + ":" + std::to_string(lineno) +
                                 ": trailing junk after number: \"" + line + "\"");
        out.push_back(v);
    }
    return out;
}

void emit_report(const sx::EvalReport& rep, const std::string& format,
                 const std::string& out_path) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file = open_out(out_path);
        out = &file;
    }
    if (format == "json")
        *out << sx::report_to_json(rep) << '\n';
    else
        sx::write_report_tsv(*out, rep);
}

struct RelexCliOpts {
    sx::RelexHyper hyper;
    std::string embeddings;
    std::string format = "text";
};

void add_relex_flags(CLI::App* sub, RelexCliOpts& o) {
    sub->add_option("--seed", o.hyper.seed, "Random seed");
    sub->add_option("--epochs", o.hyper.epochs, "Training epochs");
    sub->add_option("--hidden", o.hyper.hidden_size, "LSTM hidden units");
    sub->add_option("--dense", o.hyper.dense_size, "Dense layer units");
    sub->add_option("--dropout", o.hyper.dropout, "Dropout rate on the dense input");
    sub->add_option("--lr", o.hyper.learning_rate, "rmsprop learning rate");
    sub->add_option("--word-dim", o.hyper.word_dim, "Word embedding dimension");
    sub->add_option("--feat-dim", o.hyper.feat_dim,
                    "Concept/deprel/POS embedding dimension");
    sub->add_option("--embeddings", o.embeddings, "Pre-trained word vector file");
    sub->add_option("--format", o.format, "Word vector file format")
        ->check(CLI::IsMember({"text", "binary"}));
}

sx::WordVectors maybe_load_vectors(const RelexCliOpts& o, bool* loaded) {
    *loaded = false;
    if (o.embeddings.empty()) return {};
    sx::WordVectors wv = sx::load_word_vectors(
        o.embeddings,
        o.format == "binary" ? sx::VectorFormat::Binary : sx::VectorFormat::Text);
    if (wv.duplicates_dropped > 0)
        std::cerr << "warning: dropped " << wv.duplicates_dropped
                  << " duplicate words in " << o.embeddings << '\n';
    *loaded = true;
    return wv;
}

void print_relex_log(const sx::RelexTrainLog& log) {
    for (std::size_t e = 0; e < log.epoch_loss.size(); ++e)
        std::cerr << "epoch " << e + 1 << "  loss " << std::fixed
                  << std::setprecision(6) << log.epoch_loss[e] << "  acc "
                  << std::setprecision(4) << 100.0 * log.epoch_accuracy[e] << "%\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Shortest-dependency-path relation extraction for clinical text: "
        "arc-standard dependency parsing, path extraction between annotated "
        "concepts, and an LSTM relation classifier."};
    app.require_subcommand(1);

    // ---- convert ----
    struct ConvertOpts {
        std::string input, output;
        bool drop_nonprojective = false;
    };
    auto cv = std::make_shared<ConvertOpts>();
    CLI::App* convert = app.add_subcommand(
        "convert", "Validate a CoNLL-U treebank, optionally dropping non-projective trees");
    convert->add_option("input", cv->input, "CoNLL-U file")->required();
    convert->add_option("output", cv->output, "Validated CoNLL-U output")->required();
    convert->add_flag("--drop-nonprojective", cv->drop_nonprojective,
                      "Drop non-projective sentences");
    convert->callback([cv]() {
        std::ifstream in = open_in(cv->input);
        sx::Treebank tb = sx::read_conllu(in);
        sx::Treebank kept;
        int dropped = 0;
        for (auto& s : tb.sentences) {
            if (cv->drop_nonprojective && !sx::is_projective(s))
                ++dropped;
            else
                kept.sentences.push_back(std::move(s));
        }
        std::ofstream out = open_out(cv->output);
        sx::write_conllu(kept, out);
        std::cerr << "read " << tb.sentences.size() << " sentences, wrote "
                  << kept.sentences.size() << ", dropped " << dropped
                  << " non-projective\n";
    });

    // ---- train-parser ----
    struct TrainParserOpts {
        std::string treebank, model;
        sx::ParserHyper hyper;
    };
    auto tp = std::make_shared<TrainParserOpts>();
    CLI::App* train_parser_cmd =
        app.add_subcommand("train-parser", "Train the transition parser on gold trees");
    train_parser_cmd->add_option("treebank", tp->treebank, "Gold CoNLL-U treebank")
        ->required();
    train_parser_cmd->add_option("--model", tp->model, "Output model path")->required();
    train_parser_cmd->add_option("--seed", tp->hyper.seed, "Random seed");
    train_parser_cmd->add_option("--epochs", tp->hyper.epochs, "Training epochs");
    train_parser_cmd->add_option("--hidden", tp->hyper.hidden_size, "Hidden units");
    train_parser_cmd->add_option("--embed-dim", tp->hyper.embed_dim,
                                 "Word/POS embedding dimension");
    train_parser_cmd->add_option("--batch", tp->hyper.batch_size, "Mini-batch size");
    train_parser_cmd->add_option("--lr", tp->hyper.learning_rate, "Learning rate");
    train_parser_cmd->add_option("--unk-rate", tp->hyper.unk_replace_rate,
                                 "Singleton-to-UNK replacement rate");
    train_parser_cmd->callback([tp]() {
        std::ifstream in = open_in(tp->treebank);
        sx::Treebank tb = sx::read_conllu(in);
        sx::ParserTrainLog log;
        sx::ParserModel m = sx::train_parser(tb, tp->hyper, &log);
        sx::save_parser_model(m, tp->model);
        std::cerr << "trained on " << log.sentences_used << " sentences ("
                  << log.sentences_nonprojective_excluded
                  << " non-projective excluded), " << log.examples << " transitions\n";
        for (const auto& e : log.epochs)
            std::cerr << "epoch " << e.epoch << "  loss " << std::fixed
                      << std::setprecision(6) << e.mean_loss << "  acc "
                      << std::setprecision(4) << 100.0 * e.accuracy << "%\n";
        std::cerr << "saved " << tp->model << '\n';
    });

    // ---- parse ----
    struct ParseOpts {
        std::string input, model, output;
    };
    auto po = std::make_shared<ParseOpts>();
    CLI::App* parse_cmd =
        app.add_subcommand("parse", "Parse POS-tagged CoNLL-U input (heads ignored)");
    parse_cmd->add_option("input", po->input, "CoNLL-U input")->required();
    parse_cmd->add_option("--model", po->model, "Parser model")->required();
    parse_cmd->add_option("--output", po->output, "Output path (default stdout)");
    parse_cmd->callback([po]() {
        const sx::ParserModel m = sx::load_parser_model(po->model);
        std::ifstream in = open_in(po->input);
        sx::Treebank tb = sx::read_conllu(in, /*validate=*/false);
        sx::Treebank parsed;
        for (const auto& s : tb.sentences) parsed.sentences.push_back(sx::parse(m, s));
        if (po->output.empty()) {
            sx::write_conllu(parsed, std::cout);
        } else {
            std::ofstream out = open_out(po->output);
            sx::write_conllu(parsed, out);
        }
    });

    // ---- eval-parser ----
    struct EvalParserOpts {
        std::string gold, predicted, model;
    };
    auto ep = std::make_shared<EvalParserOpts>();
    CLI::App* eval_parser_cmd =
        app.add_subcommand("eval-parser", "Score predicted trees against gold (UAS/LAS)");
    eval_parser_cmd->add_option("gold", ep->gold, "Gold CoNLL-U treebank")->required();
    eval_parser_cmd->add_option("predicted", ep->predicted, "Predicted CoNLL-U treebank");
    eval_parser_cmd->add_option("--model", ep->model,
                                "Parse the gold file with this model instead");
    eval_parser_cmd->callback([ep]() {
        if (ep->predicted.empty() == ep->model.empty())
            throw CLI::ValidationError(
                "eval-parser", "give either a PREDICTED file or --model, not both");
        std::ifstream gin = open_in(ep->gold);
        sx::Treebank gold = sx::read_conllu(gin);
        sx::Treebank pred;
        if (!ep->model.empty()) {
            const sx::ParserModel m = sx::load_parser_model(ep->model);
            for (const auto& s : gold.sentences) pred.sentences.push_back(sx::parse(m, s));
        } else {
            std::ifstream pin = open_in(ep->predicted);
            pred = sx::read_conllu(pin);
        }
        const sx::AttachmentScore sc = sx::evaluate_uas_las(gold, pred);
        std::cout << std::fixed << std::setprecision(4) << "UAS\t" << sc.uas << "\nLAS\t"
                  << sc.las << "\ntokens\t" << sc.tokens << '\n';
    });

    // ---- extract-sdp ----
    struct ExtractOpts {
        std::string corpus, model, output, candidates;
    };
    auto ex = std::make_shared<ExtractOpts>();
    CLI::App* extract_cmd = app.add_subcommand(
        "extract-sdp", "Generate candidate pairs and their dependency-path instances");
    extract_cmd->add_option("corpus", ex->corpus, "Corpus directory")->required();
    extract_cmd->add_option("--model", ex->model,
                            "Parser model (default: use the gold trees)");
    extract_cmd->add_option("--output", ex->output, "Instance file (default stdout)");
    extract_cmd->add_option("--candidates", ex->candidates, "Also write candidate pairs");
    extract_cmd->callback([ex]() {
        const std::vector<sx::AnnotatedDocument> docs =
            sx::load_annotated_corpus(ex->corpus);
        if (docs.empty()) throw sx::ParseError(ex->corpus + ": no documents");
        sx::ParserModel parser;
        const bool use_parser = !ex->model.empty();
        if (use_parser) parser = sx::load_parser_model(ex->model);

        sx::CandidateStats stats;
        std::vector<sx::RelationCandidate> cands;
        std::vector<sx::SdpInstance> insts;
        for (const auto& d : docs) {
            sx::ExtractedInstances e =
                sx::extract_instances(d, use_parser ? &parser : nullptr, &stats);
            cands.insert(cands.end(), e.candidates.begin(), e.candidates.end());
            insts.insert(insts.end(), e.instances.begin(), e.instances.end());
        }

        std::ofstream file;
        std::ostream* out = &std::cout;
        if (!ex->output.empty()) {
            file = open_out(ex->output);
            out = &file;
        }
        for (const auto& inst : insts) *out << sx::instance_to_line(inst) << '\n';
        if (!ex->candidates.empty()) {
            std::ofstream cf = open_out(ex->candidates);
            sx::write_candidates(cf, cands);
        }
        std::cerr << docs.size() << " documents, " << stats.pairs << " candidate pairs ("
                  << stats.labeled << " labeled, " << stats.overlapping_skipped
                  << " overlapping skipped, " << stats.duplicates_merged
                  << " duplicate relations merged)\n";
    });

    // ---- train-re ----
    struct TrainReOpts {
        std::string instances, model;
        RelexCliOpts relex;
    };
    auto tr = std::make_shared<TrainReOpts>();
    CLI::App* train_re_cmd =
        app.add_subcommand("train-re", "Train the LSTM relation classifier");
    train_re_cmd->add_option("instances", tr->instances, "Instance file")->required();
    train_re_cmd->add_option("--model", tr->model, "Output model path")->required();
    add_relex_flags(train_re_cmd, tr->relex);
    train_re_cmd->callback([tr]() {
        const std::vector<sx::SdpInstance> insts = read_instances(tr->instances);
        bool have_vectors = false;
        const sx::WordVectors wv = maybe_load_vectors(tr->relex, &have_vectors);
        sx::RelexTrainLog log;
        const sx::RelexModel m =
            sx::train_relex(insts, tr->relex.hyper, have_vectors ? &wv : nullptr, &log);
        sx::save_relex_model(tr->model, m);
        std::cerr << "trained on " << insts.size() << " instances\n";
        print_relex_log(log);
        std::cerr << "saved " << tr->model << '\n';
    });

    // ---- predict-re ----
    struct PredictReOpts {
        std::string instances, model, output, report;
    };
    auto pr = std::make_shared<PredictReOpts>();
    CLI::App* predict_re_cmd =
        app.add_subcommand("predict-re", "Classify relation instances");
    predict_re_cmd->add_option("instances", pr->instances, "Instance file")->required();
    predict_re_cmd->add_option("--model", pr->model, "Relation model")->required();
    predict_re_cmd->add_option("--output", pr->output, "Prediction file");
    predict_re_cmd
        ->add_option("--report", pr->report,
                     "Print an evaluation report against the gold labels")
        ->check(CLI::IsMember({"tsv", "json"}));
    predict_re_cmd->callback([pr]() {
        const std::vector<sx::SdpInstance> insts = read_instances(pr->instances);
        const sx::RelexModel m = sx::load_relex_model(pr->model);

        sx::Confusion cm{};
        std::vector<std::string> lines;
        lines.reserve(insts.size());
        for (const auto& inst : insts) {
            const sx::RelexPrediction p = sx::predict_relation(m, inst);
            const int gold = sx::relation_label_index(inst.label);
            ++cm[static_cast<std::size_t>(gold)][static_cast<std::size_t>(p.label_index)];
            std::ostringstream line;
            line << p.label << '\t' << inst.label << '\t' << std::fixed
                 << std::setprecision(6) << p.probs(p.label_index);
            lines.push_back(line.str());
        }

        const bool report_to_stdout = !pr->report.empty();
        if (!pr->output.empty()) {
            std::ofstream out = open_out(pr->output);
            for (const auto& l : lines) out << l << '\n';
        } else if (!report_to_stdout) {
            for (const auto& l : lines) std::cout << l << '\n';
        }
        if (report_to_stdout) emit_report(sx::prf1(cm), pr->report, "");
    });

    // ---- crossval ----
    struct CrossvalOpts {
        std::string corpus, model, output;
        std::string report = "tsv";
        int folds = 5;
        RelexCliOpts relex;
    };
    auto xv = std::make_shared<CrossvalOpts>();
    CLI::App* crossval_cmd = app.add_subcommand(
        "crossval", "Document-level k-fold cross-validation of the full pipeline");
    crossval_cmd->add_option("corpus", xv->corpus, "Corpus directory")->required();
    crossval_cmd->add_option("--model", xv->model, "Parser model")->required();
    crossval_cmd->add_option("--folds", xv->folds, "Fold count");
    crossval_cmd->add_option("--report", xv->report, "Report format")
        ->check(CLI::IsMember({"tsv", "json"}));
    crossval_cmd->add_option("--output", xv->output, "Report path (default stdout)");
    add_relex_flags(crossval_cmd, xv->relex);
    crossval_cmd->callback([xv]() {
        const std::vector<sx::AnnotatedDocument> docs =
            sx::load_annotated_corpus(xv->corpus);
        const sx::ParserModel parser = sx::load_parser_model(xv->model);
        bool have_vectors = false;
        const sx::WordVectors wv = maybe_load_vectors(xv->relex, &have_vectors);

        sx::CrossvalOptions opts;
        opts.folds = xv->folds;
        opts.seed = xv->relex.hyper.seed;
        opts.relex = xv->relex.hyper;
        opts.pretrained = have_vectors ? &wv : nullptr;
        const sx::CrossvalResult res = sx::crossval(docs, parser, opts);

        emit_report(res.pooled, xv->report, xv->output);
        std::cerr << docs.size() << " documents, " << res.stats.pairs
                  << " candidate pairs (" << res.stats.labeled << " labeled, "
                  << res.stats.overlapping_skipped << " overlapping skipped)\n";
        for (std::size_t f = 0; f < res.fold_reports.size(); ++f)
            std::cerr << "fold " << f + 1 << "  micro-F1 " << std::fixed
                      << std::setprecision(4)
                      << res.fold_reports[f].micro_relations.f1 << '\n';
        std::cerr << "mean fold micro-F1 " << std::fixed << std::setprecision(4)
                  << res.mean_micro_f1 << '\n';
    });

    // ---- ttest ----
    struct TTestOpts {
        std::string a, b;
    };
    auto tt = std::make_shared<TTestOpts>();
    CLI::App* ttest_cmd = app.add_subcommand(
        "ttest", "Paired one-sided t-test over per-fold scores (one number per line)");
    ttest_cmd->add_option("scores_a", tt->a, "First score file")->required();
    ttest_cmd->add_option("scores_b", tt->b, "Second score file")->required();
    ttest_cmd->callback([tt]() {
        const sx::TTestResult r =
            sx::paired_t_test(read_scores(tt->a), read_scores(tt->b));
        std::cout << "t\t" << std::fixed << std::setprecision(6) << r.t << '\n'
                  << "df\t" << r.df << '\n'
                  << "p\t" << std::scientific << std::setprecision(6) << r.p << '\n';
    });

    // ---- synth ----
    struct SynthCliOpts {
        std::string dir;
        sx::SynthOptions opts;
    };
    auto sy = std::make_shared<SynthCliOpts>();
    CLI::App* synth_cmd = app.add_subcommand(
        "synth", "Generate a synthetic annotated corpus with gold trees");
    synth_cmd->add_option("output_dir", sy->dir, "Output directory")->required();
    synth_cmd->add_option("--docs", sy->opts.documents, "Document count");
    synth_cmd->add_option("--seed", sy->opts.seed, "Random seed");
    synth_cmd->callback([sy]() {
        const sx::SynthCorpus corpus = sx::generate_synthetic_corpus(sy->opts);
        sx::write_synthetic_corpus(corpus, sy->dir);
        std::cerr << "wrote " << corpus.docs.size() << " documents ("
                  << corpus.combined.sentences.size() << " sentences) to " << sy->dir
                  << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const sx::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const sx::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const sx::StructureError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
