#include "glyphforge/cli.hpp"

#include <atomic>
#include <csignal>
#include <iomanip>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "glyphforge/error.hpp"
#include "glyphforge/json_codec.hpp"
#include "glyphforge/service.hpp"
#include "glyphforge/store.hpp"

namespace glyphforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PatternFlags {
    int ink_threshold = 127;
    double coverage = 0.5;

    DigitizeOptions options() const { return DigitizeOptions{ink_threshold, coverage}; }
};

void add_pattern_flags(CLI::App& cmd, PatternFlags& flags) {
    cmd.add_option("--ink-threshold", flags.ink_threshold, "Luminance at or below which a pixel is ink")
        ->check(CLI::Range(0, 255))
        ->capture_default_str();
    cmd.add_option("--coverage", flags.coverage, "Ink fraction that makes a cell black")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
}

CLI::Option* add_kb_option(CLI::App& cmd, std::string& kb_path) {
    return cmd.add_option("--kb", kb_path, "Knowledge base file (one per user profile)")
        ->envname("GLYPHFORGE_KB")
        ->required();
}

KnowledgeBase load_or_create(const fs::path& path, const std::optional<GridDims>& grid) {
    if (!fs::exists(path)) return KnowledgeBase(grid.value_or(kDefaultDims));
    KnowledgeBase kb = load_kb(path);
    if (grid && *grid != kb.dims()) {
        throw DimsMismatch(path.string() + " is " + kb.dims().to_string() + ", --grid asks for " + grid->to_string());
    }
    return kb;
}

std::optional<GridDims> parse_grid_flag(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return GridDims::parse(text);
}

int cmd_teach(const std::string& kb_path, const std::string& grid_text, const std::string& label_text,
              const std::vector<std::string>& patterns, const PatternFlags& flags, std::ostream& out) {
    const Label label(label_text);
    KnowledgeBase kb = load_or_create(kb_path, parse_grid_flag(grid_text));

    std::vector<BinaryGrid> grids;
    grids.reserve(patterns.size());
    for (const auto& p : patterns) grids.push_back(load_pattern(p, kb.dims(), flags.options()));

    std::int64_t count = 0;
    for (std::size_t i = 0; i < grids.size(); ++i) {
        count = kb.teach(label, grids[i]);
        out << "taught " << label.str() << " from " << patterns[i] << " (teach_count " << count << ")\n";
    }
    save_kb(kb, kb_path);
    out << label.str() << " teach_count " << count << '\n';
    return kExitOk;
}

int decision_exit_code(const Decision& d) {
    switch (d.kind) {
        case DecisionKind::Match: return kExitOk;
        case DecisionKind::Unknown: return kExitUnknown;
        case DecisionKind::EmptyKb: return kExitEmptyKb;
    }
    return kExitError;
}

void print_decision(std::ostream& out, const Decision& d) {
    if (!d.scores.empty()) {
        out << std::left << std::setw(6) << "rank" << std::setw(20) << "label" << std::right << std::setw(10) << "psi"
            << std::setw(10) << "mu" << std::setw(8) << "q" << "  exact\n";
        std::size_t rank = 1;
        for (const auto& s : d.scores) {
            out << std::left << std::setw(6) << rank++ << std::setw(20) << s.label.str() << std::right << std::setw(10)
                << s.psi << std::setw(10) << s.mu << std::setw(8) << s.q.display() << "  " << s.q.num() << '/'
                << s.q.den() << '\n';
        }
    }
    if (!d.unscorable.empty()) {
        out << "unscorable (mu = 0):";
        for (const auto& l : d.unscorable) out << ' ' << l.str();
        out << '\n';
    }
    switch (d.kind) {
        case DecisionKind::Match:
            out << "MATCH " << d.best->label.str() << " q=" << d.best->q.display() << '\n';
            break;
        case DecisionKind::Unknown:
            out << "UNKNOWN (best " << d.best->label.str() << " q=" << d.best->q.display() << ")\n";
            out << "hint: q is below the threshold " << d.threshold.display()
                << "; treat the pattern as unknown, or teach it under the intended label and classify again\n";
            break;
        case DecisionKind::EmptyKb:
            out << "EMPTY knowledge base has no scorable labels\n";
            break;
    }
}

int cmd_classify(const std::string& kb_path, const std::string& input, const std::string& threshold_text,
                 const std::string& output, const PatternFlags& flags, std::ostream& out) {
    const Quotient threshold = Quotient::parse(threshold_text);
    const KnowledgeBase kb = load_kb(kb_path);
    const BinaryGrid pattern = load_pattern(input, kb.dims(), flags.options());
    const Decision decision = classify(kb, pattern, threshold);
    if (output == "json") {
        out << decision_to_json(decision).dump(2) << '\n';
    } else {
        print_decision(out, decision);
    }
    return decision_exit_code(decision);
}

int cmd_eval(const std::string& kb_path, const std::string& corpus, const std::string& threshold_text,
             const std::string& output, const PatternFlags& flags, std::ostream& out, std::ostream& err) {
    const Quotient threshold = Quotient::parse(threshold_text);
    const KnowledgeBase kb = load_kb(kb_path);
    const EvalReport report = evaluate(kb, corpus, threshold, flags.options());
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    if (output == "json") {
        out << eval_to_json(report).dump(2) << '\n';
    } else {
        print_eval(out, report);
    }
    return kExitOk;
}

int cmd_inspect(const std::string& kb_path, const std::string& label_text, bool heat, std::ostream& out) {
    const KnowledgeBase kb = load_kb(kb_path);
    const Label label(label_text);
    print_weights(out, label, kb.weights(label), heat);
    return kExitOk;
}

int cmd_digitize(const std::string& input, const std::string& output, const std::string& grid_text,
                 const PatternFlags& flags, std::ostream& out) {
    const GridDims dims = parse_grid_flag(grid_text).value_or(kDefaultDims);
    const BinaryGrid grid = digitize(load_raster(input), dims, flags.options());
    if (output == "-") {
        out << format_glyph(grid);
    } else {
        save_glyph(grid, output);
    }
    return kExitOk;
}

int cmd_serve(const std::string& kb_path, const std::string& grid_text, const std::string& bind,
              const std::string& static_dir, std::ostream& out, std::ostream& err) {
    const auto [host, port] = parse_bind_address(bind);
    auto session = ApiSession::open(kb_path, parse_grid_flag(grid_text));

    httplib::Server server;
    mount_routes(server, session, static_dir.empty() ? std::nullopt : std::optional<fs::path>(static_dir));

    // Route SIGINT/SIGTERM to a watcher thread instead of an async handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
        err << "error: cannot bind " << bind << '\n';
        return kExitError;
    }
    out << "serving " << kb_path << " (" << session.snapshot().dims().to_string() << ") on http://" << host << ':'
        << bound << std::endl;

    std::atomic<bool> done{false};
    std::thread watcher([&] {
        const timespec poll{0, 200'000'000};
        while (!done.load()) {
            if (sigtimedwait(&signals, nullptr, &poll) > 0) {
                server.stop();
                return;
            }
        }
    });
    server.listen_after_bind();
    done.store(true);
    watcher.join();
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    out << "stopped; knowledge base at version " << session.version() << std::endl;
    return kExitOk;
}

std::string ramp_char(std::int32_t w, std::int64_t n) {
    static const char* const kRamp[] = {"-", ":", "·", "+", "#"};
    if (n == 0) return kRamp[2];
    const std::int64_t index = (4 * (static_cast<std::int64_t>(w) + n) + n) / (2 * n);
    return kRamp[std::clamp<std::int64_t>(index, 0, 4)];
}

}  // namespace

std::optional<double> EvalReport::accuracy() const {
    if (tested == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(tested);
}

EvalReport evaluate(const KnowledgeBase& kb, const fs::path& corpus_dir, const Quotient& threshold,
                    const DigitizeOptions& options) {
    if (!fs::is_directory(corpus_dir)) throw IoError("corpus " + corpus_dir.string() + " is not a directory");

    std::vector<fs::path> top;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) top.push_back(entry.path());
    std::sort(top.begin(), top.end());

    EvalReport report;
    std::vector<Quotient> winners;
    for (const auto& dir : top) {
        const std::string name = dir.filename().string();
        if (!fs::is_directory(dir)) {
            report.warnings.push_back("ignoring stray file " + dir.string());
            continue;
        }
        if (auto reason = Label::validate(name); !reason.empty()) {
            report.warnings.push_back("ignoring directory " + dir.string() + ": " + reason);
            continue;
        }
        const Label expected(name);
        LabelEval row;
        row.label = name;
        row.taught = kb.contains(expected) ? kb.weights(expected).teach_count() : 0;

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const Decision d = classify(kb, load_pattern(file, kb.dims(), options), threshold);
            ++row.tested;
            if (d.best) winners.push_back(d.best->q);
            if (d.kind != DecisionKind::Match) {
                ++row.unknown;
            } else if (d.best->label == expected) {
                ++row.correct;
            } else {
                ++row.misclassified;
                ++report.confusion[{name, d.best->label.str()}];
            }
        }
        report.tested += row.tested;
        report.correct += row.correct;
        report.unknown += row.unknown;
        report.misclassified += row.misclassified;
        report.per_label.push_back(std::move(row));
    }
    if (!winners.empty()) {
        std::sort(winners.begin(), winners.end());
        report.q_min = winners.front();
        report.q_median = winners[(winners.size() - 1) / 2];
        report.q_max = winners.back();
    }
    return report;
}

json eval_to_json(const EvalReport& report) {
    json per_label = json::array();
    for (const auto& r : report.per_label) {
        per_label.push_back(json{{"label", r.label},
                                 {"taught", r.taught},
                                 {"tested", r.tested},
                                 {"correct", r.correct},
                                 {"unknown", r.unknown},
                                 {"misclassified", r.misclassified}});
    }
    json confusion = json::array();
    for (const auto& [pair, count] : report.confusion) {
        confusion.push_back(json{{"expected", pair.first}, {"predicted", pair.second}, {"count", count}});
    }
    const auto q = [](const std::optional<Quotient>& v) -> json {
        if (!v) return nullptr;
        return json{{"num", v->num()}, {"den", v->den()}, {"display", v->display()}};
    };
    const auto acc = report.accuracy();
    return json{{"tested", report.tested},
                {"correct", report.correct},
                {"unknown", report.unknown},
                {"misclassified", report.misclassified},
                {"accuracy", acc ? json(*acc) : json(nullptr)},
                {"per_label", std::move(per_label)},
                {"confusion", std::move(confusion)},
                {"winning_q", {{"min", q(report.q_min)}, {"median", q(report.q_median)}, {"max", q(report.q_max)}}}};
}

void print_eval(std::ostream& out, const EvalReport& report) {
    out << std::left << std::setw(20) << "label" << std::right << std::setw(8) << "taught" << std::setw(8) << "tested"
        << std::setw(9) << "correct" << std::setw(9) << "unknown" << std::setw(15) << "misclassified" << '\n';
    for (const auto& r : report.per_label) {
        out << std::left << std::setw(20) << r.label << std::right << std::setw(8) << r.taught << std::setw(8)
            << r.tested << std::setw(9) << r.correct << std::setw(9) << r.unknown << std::setw(15) << r.misclassified
            << '\n';
    }
    out << "tested " << report.tested << ", correct " << report.correct << ", unknown " << report.unknown
        << ", misclassified " << report.misclassified << '\n';
    if (auto acc = report.accuracy()) {
        out << "accuracy " << std::fixed << std::setprecision(3) << *acc << std::defaultfloat << '\n';
    } else {
        out << "accuracy n/a\n";
    }
    for (const auto& [pair, count] : report.confusion) {
        out << "confusion " << pair.first << " -> " << pair.second << ": " << count << '\n';
    }
    if (report.q_min) {
        out << "winning q min " << report.q_min->display() << " median " << report.q_median->display() << " max "
            << report.q_max->display() << '\n';
    }
}

void print_weights(std::ostream& out, const Label& label, const WeightMatrix& weights, bool heat) {
    out << "label " << label.str() << '\n';
    out << "teach_count " << weights.teach_count() << '\n';
    for (std::size_t r = 0; r < weights.dims().height; ++r) {
        for (std::size_t c = 0; c < weights.dims().width; ++c) {
            if (c) out << ' ';
            out << weights.at(r, c);
        }
        out << '\n';
    }
    if (!heat) return;
    out << '\n';
    for (std::size_t r = 0; r < weights.dims().height; ++r) {
        for (std::size_t c = 0; c < weights.dims().width; ++c) out << ramp_char(weights.at(r, c), weights.teach_count());
        out << '\n';
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"glyphforge: teach and recognize glyphs with per-label weight matrices"};
    app.name("glyphforge");
    app.require_subcommand(1);

    std::string kb_path, grid_text, label_text, threshold_text = "0.5", output = "text", input, target;
    std::string bind = "127.0.0.1:8080", static_dir;
    std::vector<std::string> patterns;
    bool heat = false;
    PatternFlags flags;

    const auto output_option = [&](CLI::App& cmd) {
        cmd.add_option("--output", output, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    };

    auto* teach = app.add_subcommand("teach", "Teach one or more patterns under a label");
    add_kb_option(*teach, kb_path);
    teach->add_option("--grid", grid_text, "Grid size WxH for a new knowledge base (default 32x32)");
    teach->add_option("--label", label_text, "Label to teach")->required();
    teach->add_option("patterns", patterns, "Glyph or PBM/PGM files")->required();
    add_pattern_flags(*teach, flags);

    auto* cls = app.add_subcommand("classify", "Score a pattern against every label");
    add_kb_option(*cls, kb_path);
    cls->add_option("input", input, "Glyph or PBM/PGM file")->required();
    cls->add_option("--threshold", threshold_text, "Minimum q for a match")->capture_default_str();
    output_option(*cls);
    add_pattern_flags(*cls, flags);

    auto* eval = app.add_subcommand("eval", "Classify a labeled corpus (one directory per label)");
    add_kb_option(*eval, kb_path);
    eval->add_option("corpus", input, "Corpus directory")->required();
    eval->add_option("--threshold", threshold_text, "Minimum q for a match")->capture_default_str();
    output_option(*eval);
    add_pattern_flags(*eval, flags);

    auto* inspect = app.add_subcommand("inspect", "Print a label's weight matrix");
    add_kb_option(*inspect, kb_path);
    inspect->add_option("--label", label_text, "Label to show")->required();
    inspect->add_flag("--heat", heat, "Also print a character heat map");

    auto* dig = app.add_subcommand("digitize", "Sample a PBM/PGM raster into a glyph file");
    dig->add_option("input", input, "PBM/PGM raster")->required();
    dig->add_option("output", target, "Glyph file to write, or - for stdout")->required();
    dig->add_option("--grid", grid_text, "Grid size WxH (default 32x32)");
    add_pattern_flags(*dig, flags);

    auto* serve = app.add_subcommand("serve", "Serve the knowledge base over HTTP");
    add_kb_option(*serve, kb_path);
    serve->add_option("--grid", grid_text, "Grid size WxH for a new knowledge base (default 32x32)");
    serve->add_option("--bind", bind, "host:port to listen on")->capture_default_str();
    serve->add_option("--static", static_dir, "Directory of teach pad assets served at /");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*teach) return cmd_teach(kb_path, grid_text, label_text, patterns, flags, out);
        if (*cls) return cmd_classify(kb_path, input, threshold_text, output, flags, out);
        if (*eval) return cmd_eval(kb_path, input, threshold_text, output, flags, out, err);
        if (*inspect) return cmd_inspect(kb_path, label_text, heat, out);
        if (*dig) return cmd_digitize(input, target, grid_text, flags, out);
        if (*serve) return cmd_serve(kb_path, grid_text, bind, static_dir, out, err);
    } catch (const EmptyRaster& e) {
        err << "error: EmptyRaster: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}

}  // namespace glyphforge
