// Copyright 2026 The Wikiner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: ingest, label-propagate, train-disambiguator,
// train, annotate, link, evaluate, sweep and serve.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <wikiner/mediawiki.hpp>
#include <wikiner/service.hpp>

namespace
{

using namespace wikiner;
using nlohmann::json;

std::ifstream open_in(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return in;
}

std::ofstream open_out(const std::string &path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path);
    }
    return out;
}

std::string slurp(std::istream &in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

std::vector<PageRecord> read_pages(const std::string &path, bool xml)
{
    auto in = open_in(path);
    return xml ? mediawiki::read_xml(in) : read_jsonl(in);
}

std::vector<Document> read_corpora(const std::vector<std::string> &paths)
{
    std::vector<Document> docs;
    for (const auto &p : paths) {
        auto in = open_in(p);
        auto part = parse_corpus(in);
        docs.insert(docs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return docs;
}

void print_json(const json &j) { std::cout << j.dump(2) << '\n'; }

json import_report_json(const ImportReport &r)
{
    return {{"pages", r.pages},
            {"articles", r.articles},
            {"categories", r.categories},
            {"redirects", r.redirects},
            {"skipped_namespace", r.skipped_namespace},
            {"duplicate_titles", r.duplicate_titles},
            {"links", r.links},
            {"dropped_links", r.dropped_links},
            {"dangling_parents", r.dangling_parents}};
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input;
    bool xml = false;
    std::string out;
    std::string pages_out;
};

void ingest(const IngestArgs &a)
{
    auto pages = read_pages(a.input, a.xml);
    Snapshot snap{import_dump(pages), std::nullopt};
    snap.save_file(a.out);
    if (!a.pages_out.empty()) {
        auto out = open_out(a.pages_out);
        write_jsonl(out, pages);
    }
    print_json(import_report_json(snap.kb.report));
}

struct PropagateArgs {
    std::string snapshot;
    std::string seeds;
    std::string labels_out;
};

void label_propagate(const PropagateArgs &a)
{
    auto snap = Snapshot::load_file(a.snapshot);
    auto in = open_in(a.seeds);
    auto labeling = propagate_labels(snap.kb.graph, read_seeds(in));
    const auto &g = snap.kb.graph;
    if (!a.labels_out.empty()) {
        auto out = open_out(a.labels_out);
        out << "id\ttitle\tkind\tlabel\trule\tdistance\n";
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto &n = g.node(i);
            const auto &r = *labeling.resolved[i];
            out << n.id << '\t' << n.title << '\t' << to_string(n.kind) << '\t'
                << (r.rule == ResolutionRule::unreachable ? "-" : label_name(r.label)) << '\t' << to_string(r.rule)
                << '\t' << r.distance << '\n';
        }
    }
    auto rep = coverage_report(g, labeling);
    print_json({{"articles", rep.articles},
                {"labeled_articles", rep.labeled_articles},
                {"percent_articles", rep.percent_articles()},
                {"categories", rep.categories},
                {"labeled_categories", rep.labeled_categories},
                {"article_counts", rep.article_counts},
                {"conflicts", rep.conflicts.size()}});
}

struct DisambiguatorArgs {
    std::string snapshot;
    std::string dump;
    bool xml = false;
    std::size_t max_depth = 8;
    double min_sense_probability = 0.01;
    std::uint64_t seed = 1;
    std::string out;
};

void train_disambiguator_cmd(const DisambiguatorArgs &a)
{
    auto snap = Snapshot::load_file(a.snapshot);
    auto samples = harvest_samples(read_pages(a.dump, a.xml), snap.kb, a.min_sense_probability);
    auto fit = fit_disambiguator(std::move(samples), a.max_depth, a.seed);
    snap.disambiguator = std::move(fit.model);
    snap.save_file(a.out.empty() ? a.snapshot : a.out);
    print_json({{"fit_samples", fit.fit_samples},
                {"validation_samples", fit.validation_samples},
                {"validation_accuracy", fit.validation_accuracy},
                {"depth", snap.disambiguator->depth()}});
}

struct TrainArgs {
    std::string config;
    std::vector<std::string> corpora;
    std::string main_out;
    std::string sub_out;
};

void train(const TrainArgs &a)
{
    auto cfg = PipelineConfig::load_file(a.config);
    auto res = load_resources(cfg, false);
    FeatureExtractor fx(res);
    auto models = train_models(read_corpora(a.corpora), fx, res, cfg.tagger, cfg.seed);
    models.main.save_file(a.main_out);
    json report{{"main_losses", models.main_losses}};
    if (models.sub) {
        if (a.sub_out.empty()) {
            spdlog::warn("corpus has sub-layer spans but no --sub-out was given; sub model discarded");
        } else {
            models.sub->save_file(a.sub_out);
        }
        report["sub_losses"] = models.sub_losses;
    }
    print_json(report);
}

struct AnnotateArgs {
    std::string config;
    std::string input;
    bool pretokenized = false;
    std::string format = "json";
    bool no_mask = false;
};

void annotate(const AnnotateArgs &a)
{
    auto res = load_resources(PipelineConfig::load_file(a.config));
    Annotator annot(res);
    annot.set_sub_masking(!a.no_mask);
    std::vector<Document> docs;
    if (a.pretokenized) {
        auto in = open_in(a.input);
        for (auto &d : parse_corpus(in)) {
            docs.push_back(annot.annotate(std::move(d)));
        }
    } else {
        std::string text;
        if (a.input.empty() || a.input == "-") {
            text = slurp(std::cin);
        } else {
            auto in = open_in(a.input);
            text = slurp(in);
        }
        docs.push_back(annot.annotate_text(text, "doc0"));
    }
    if (a.format == "tsv") {
        write_corpus(std::cout, docs);
        return;
    }
    json out = json::array();
    for (const auto &d : docs) {
        out.push_back(document_to_json(d));
    }
    print_json(out);
}

struct LinkArgs {
    std::string config;
    std::string input;
};

void link(const LinkArgs &a)
{
    auto res = load_resources(PipelineConfig::load_file(a.config), false);
    FeatureExtractor fx(res);
    std::string text;
    if (a.input.empty() || a.input == "-") {
        text = slurp(std::cin);
    } else {
        auto in = open_in(a.input);
        text = slurp(in);
    }
    json out = json::array();
    for (const auto &s : tokenize_text(text, res.config.tokenizer)) {
        for (const auto &m : fx.link(s.tokens)) {
            out.push_back({{"label", m.label},
                           {"concept", m.concept_id},
                           {"title", res.snapshot->kb.graph.find(m.concept_id)->title},
                           {"category", to_string(m.category)},
                           {"score", m.score}});
        }
    }
    print_json(out);
}

struct EvaluateArgs {
    std::string gold;
    std::string pred;
    bool as_json = false;
};

void evaluate_cmd(const EvaluateArgs &a)
{
    auto gold = read_corpora({a.gold});
    auto pred = read_corpora({a.pred});
    auto r = evaluate(pred, gold);
    if (a.as_json) {
        print_json(report_to_json(r));
        return;
    }
    std::printf("%-28s %8s %8s %8s %8s %6s\n", "category", "P", "R", "F1", "ovl-F1", "gold");
    for (const auto &c : r.categories) {
        std::printf("%-28s %8.2f %8.2f %8.2f %8.2f %6zu\n", c.category.c_str(), c.exact.precision(), c.exact.recall(),
                    c.exact.f1(), c.overlap.f1(), c.exact.gold);
    }
    std::printf("exact %.2f  overlap %.2f  final %.2f\n", r.exact(), r.overlap(), r.final());
}

struct SweepArgs {
    std::string config;
    std::vector<std::string> corpora;
    std::string grid;
    std::size_t folds = 5;
};

void sweep_cmd(const SweepArgs &a)
{
    auto cfg = PipelineConfig::load_file(a.config);
    auto res = load_resources(cfg, false);
    json axes;
    if (!a.grid.empty()) {
        auto in = open_in(a.grid);
        axes = json::parse(in, nullptr, true, true);
    }
    auto rows = sweep(expand_grid(cfg.tagger, axes), read_corpora(a.corpora), res, a.folds, cfg.seed);
    json out = json::array();
    for (const auto &r : rows) {
        out.push_back({{"name", r.name}, {"fold_scores", r.fold_scores}, {"mean", r.mean}});
    }
    print_json(out);
}

struct ServeArgs {
    std::string config;
    std::string host = "127.0.0.1";
    int port = 8080;
    bool persist_seeds = false;
    std::string static_dir;
};

Service *g_service = nullptr;

void serve(const ServeArgs &a)
{
    auto cfg = PipelineConfig::load_file(a.config);
    Service::Options opts;
    if (a.persist_seeds) {
        if (cfg.seeds.empty()) {
            throw Error("--persist-seeds needs a `seeds` file in the config");
        }
        opts.seeds_path = cfg.seeds;
    }
    opts.static_dir = a.static_dir;
    Service svc(load_resources(cfg), opts);
    int port = svc.bind(a.host, a.port);
    std::printf("listening on http://%s:%d\n", a.host.c_str(), port);
    std::fflush(stdout);
    g_service = &svc;
    std::signal(SIGINT, [](int) { g_service->stop(); });
    std::signal(SIGTERM, [](int) { g_service->stop(); });
    svc.run();
    g_service = nullptr;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Knowledge-based named entity recognition toolkit"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    IngestArgs ia;
    auto *ingest_cmd = app.add_subcommand("ingest", "Build a statistics snapshot from a page dump");
    ingest_cmd->add_option("input", ia.input, "JSONL page records, or MediaWiki XML with --xml")->required();
    ingest_cmd->add_flag("--xml", ia.xml, "Input is a MediaWiki XML export");
    ingest_cmd->add_option("-o,--out", ia.out, "Snapshot file")->required();
    ingest_cmd->add_option("--pages-out", ia.pages_out, "Also write the parsed pages as JSONL");

    PropagateArgs pa;
    auto *prop_cmd = app.add_subcommand("label-propagate", "Propagate seed labels and report coverage");
    prop_cmd->add_option("--snapshot", pa.snapshot)->required();
    prop_cmd->add_option("--seeds", pa.seeds)->required();
    prop_cmd->add_option("--labels-out", pa.labels_out, "Write one resolved label per node as TSV");

    DisambiguatorArgs da;
    auto *dis_cmd = app.add_subcommand("train-disambiguator", "Fit the sense disambiguator on the dump's links");
    dis_cmd->add_option("--snapshot", da.snapshot)->required();
    dis_cmd->add_option("--dump", da.dump, "The dump the snapshot was built from")->required();
    dis_cmd->add_flag("--xml", da.xml);
    dis_cmd->add_option("--max-depth", da.max_depth)->capture_default_str();
    dis_cmd->add_option("--min-sense-probability", da.min_sense_probability)->capture_default_str();
    dis_cmd->add_option("--seed", da.seed)->capture_default_str();
    dis_cmd->add_option("-o,--out", da.out, "Output snapshot (default: overwrite --snapshot)");

    TrainArgs ta;
    auto *train_cmd = app.add_subcommand("train", "Train the main and sub taggers");
    train_cmd->add_option("--config", ta.config)->required();
    train_cmd->add_option("--corpus", ta.corpora, "Column-format training files")->required();
    train_cmd->add_option("--main-out", ta.main_out)->required();
    train_cmd->add_option("--sub-out", ta.sub_out);

    AnnotateArgs aa;
    auto *ann_cmd = app.add_subcommand("annotate", "Tag raw text or a column-format file");
    ann_cmd->add_option("--config", aa.config)->required();
    ann_cmd->add_option("input", aa.input, "Input file (default: stdin)");
    ann_cmd->add_flag("--pretokenized", aa.pretokenized, "Input is in column format");
    ann_cmd->add_option("--format", aa.format)->check(CLI::IsMember({"json", "tsv"}))->capture_default_str();
    ann_cmd->add_flag("--no-sub-mask", aa.no_mask, "Do not restrict sub tags to the main spans");

    LinkArgs la;
    auto *link_cmd = app.add_subcommand("link", "Run entity linking on raw text");
    link_cmd->add_option("--config", la.config)->required();
    link_cmd->add_option("input", la.input, "Input file (default: stdin)");

    EvaluateArgs ea;
    auto *eval_cmd = app.add_subcommand("evaluate", "Score predictions against gold annotations");
    eval_cmd->add_option("--gold", ea.gold)->required();
    eval_cmd->add_option("--pred", ea.pred)->required();
    eval_cmd->add_flag("--json", ea.as_json);

    SweepArgs sa;
    auto *sweep_sub = app.add_subcommand("sweep", "Cross-validated grid search over tagger settings");
    sweep_sub->add_option("--config", sa.config)->required();
    sweep_sub->add_option("--corpus", sa.corpora)->required();
    sweep_sub->add_option("--grid", sa.grid, "JSON object mapping tagger keys to value lists");
    sweep_sub->add_option("--folds", sa.folds)->capture_default_str();

    ServeArgs va;
    auto *serve_cmd = app.add_subcommand("serve", "Run the labeling HTTP service");
    serve_cmd->add_option("--config", va.config)->required();
    serve_cmd->add_option("--host", va.host)->capture_default_str();
    serve_cmd->add_option("--port", va.port, "0 picks a free port")->capture_default_str();
    serve_cmd->add_flag("--persist-seeds", va.persist_seeds, "Rewrite the config's seed file after each edit");
    serve_cmd->add_option("--static", va.static_dir, "Directory served under /");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_default_logger(spdlog::stderr_color_mt("wikiner"));
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
    try {
        if (*ingest_cmd) {
            ingest(ia);
        } else if (*prop_cmd) {
            label_propagate(pa);
        } else if (*dis_cmd) {
            train_disambiguator_cmd(da);
        } else if (*train_cmd) {
            train(ta);
        } else if (*ann_cmd) {
            annotate(aa);
        } else if (*link_cmd) {
            link(la);
        } else if (*eval_cmd) {
            evaluate_cmd(ea);
        } else if (*sweep_sub) {
            sweep_cmd(sa);
        } else if (*serve_cmd) {
            serve(va);
        }
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
