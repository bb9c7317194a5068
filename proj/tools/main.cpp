// opbeam: instance generation, solving, training, benchmarking and plotting.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "opbeam/bench_table.hpp"
#include "opbeam/checkpoint.hpp"
#include "opbeam/generator.hpp"
#include "opbeam/instance_io.hpp"
#include "opbeam/methods.hpp"
#include "opbeam/parallel.hpp"
#include "opbeam/random.hpp"
#include "opbeam/render.hpp"
#include "opbeam/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace opbeam;

namespace {

/// Bad flag values detected after parsing; reported with exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Solver flags shared by `solve` and `bench`

struct SolverFlags {
    std::size_t beam_size = 100;
    std::size_t k = 20;
    double tau = 0.05;
    std::uint64_t seed = 0;
    std::string scorer;
    std::string checkpoint;
    int threads = 1;
    bool omit_timing = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--beam-size", beam_size, "Beam width for tsili-beam and dqn-beam")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd->add_option("--k", k, "Cost-level beam capacity for cs")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--tau", tau, "Cost interval width for cs")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Seed for the random method")->capture_default_str();
        cmd->add_option("--scorer", scorer, "Score function for cs: prize, tsili, logprob-tsili, dqn");
        cmd->add_option("--checkpoint", checkpoint, "Trained network for dqn methods and the dqn scorer");
        cmd->add_option("--threads", threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_flag("--omit-timing", omit_timing, "Write 0 for every time field (byte-stable output)");
    }
};

struct LoadedModel {
    std::unique_ptr<QNetwork> net;
};

LoadedModel load_model(const SolverFlags& flags) {
    LoadedModel m;
    if (!flags.checkpoint.empty()) {
        auto ck = load_checkpoint(flags.checkpoint);
        m.net = std::make_unique<QNetwork>(ck.config, std::move(ck.params), 1);
    }
    return m;
}

SolveOptions make_options(const SolverFlags& flags, const LoadedModel& model) {
    SolveOptions opts;
    opts.beam_size = flags.beam_size;
    opts.k = flags.k;
    opts.tau = flags.tau;
    opts.seed = flags.seed;
    opts.model = model.net.get();
    if (!flags.scorer.empty()) {
        const auto s = parse_scorer(flags.scorer);
        if (!s) throw UsageError("unknown scorer '" + flags.scorer + "'");
        opts.scorer = *s;
    }
    return opts;
}

Method require_method(const std::string& name) {
    const auto m = parse_method(name);
    if (!m) throw UsageError("unknown method '" + name + "'");
    return *m;
}

void require_checkpoint(Method m, const SolveOptions& opts) {
    if (needs_model(m) && opts.model == nullptr) {
        throw UsageError(std::string(to_string(m)) + " requires --checkpoint");
    }
    if (m == Method::Cs && opts.scorer == ScorerKind::Dqn && opts.model == nullptr) {
        throw UsageError("the dqn scorer requires --checkpoint");
    }
}

json method_params(Method m, const SolveOptions& opts, const SolverFlags& flags) {
    json p = json::object();
    switch (m) {
    case Method::Random:
        p["seed"] = opts.seed;
        break;
    case Method::TsiliBeam:
        p["beam_size"] = opts.beam_size;
        break;
    case Method::DqnBeam:
        p["beam_size"] = opts.beam_size;
        p["checkpoint"] = flags.checkpoint;
        break;
    case Method::DqnGreedy:
        p["checkpoint"] = flags.checkpoint;
        break;
    case Method::Cs:
        p["k"] = opts.k;
        p["tau"] = opts.tau;
        p["scorer"] = std::string(
            to_string(opts.scorer.value_or(opts.model != nullptr ? ScorerKind::Dqn : ScorerKind::Prize)));
        if (opts.model != nullptr) p["checkpoint"] = flags.checkpoint;
        break;
    case Method::Exact:
    case Method::TsiliGreedy:
        break;
    }
    return p;
}

// ---------------------------------------------------------------------------
// gen

struct GenFlags {
    int n = 20;
    std::string kind = "uniform";
    std::optional<double> t_max;
    int count = 1;
    std::uint64_t seed = 0;
    std::string out;
};

int run_gen(const GenFlags& f) {
    const auto kind = parse_prize_kind(f.kind);
    if (!kind) throw UsageError("unknown prize kind '" + f.kind + "'");
    const auto budget = f.t_max ? f.t_max : default_budget(f.n);
    if (!budget) throw UsageError("--t-max is required for n=" + std::to_string(f.n));

    const fs::path dir(f.out);
    fs::create_directories(dir);
    json files = json::array();
    for (int i = 0; i < f.count; ++i) {
        const std::uint64_t seed = f.seed + static_cast<std::uint64_t>(i);
        char name[64];
        std::snprintf(name, sizeof name, "instance_%06d.json", i);
        write_instance(generate_euclidean_instance(f.n, *kind, *budget, seed), dir / name);
        files.push_back({{"file", name}, {"seed", seed}});
    }
    json manifest{{"n", f.n}, {"kind", f.kind}, {"t_max", *budget}, {"seed", f.seed},
                  {"count", f.count}, {"instances", files}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << f.count << " instance(s) to " << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// solve

int run_solve(const std::string& instance_file, const std::string& method_name, const SolverFlags& flags,
              const std::string& out) {
    const Method method = require_method(method_name);
    const Instance inst = read_instance(instance_file);
    const auto model = load_model(flags);
    const auto opts = make_options(flags, model);
    require_checkpoint(method, opts);

    const auto t0 = std::chrono::steady_clock::now();
    const SearchResult res = solve(inst, method, opts);
    const double elapsed = flags.omit_timing ? 0.0 : seconds_since(t0);

    json rec;
    rec["instance"] = fs::path(instance_file).filename().string();
    rec["method"] = method_name;
    rec["params"] = method_params(method, opts, flags);
    rec["path"] = std::vector<NodeId>(res.best_path.nodes().begin(), res.best_path.nodes().end());
    rec["prize"] = res.best_path.prize();
    rec["cost"] = res.best_path.cost();
    rec["time_s"] = elapsed;
    const std::string text = rec.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train

int run_train(const std::string& config_file, bool print_defaults, const std::string& out,
              std::string log_file) {
    if (print_defaults) {
        std::cout << train_config_to_json(TrainConfig{});
        return 0;
    }
    if (config_file.empty()) throw UsageError("train needs --config (or --print-defaults)");
    if (out.empty()) throw UsageError("train needs --out for the checkpoint");
    const TrainConfig cfg = train_config_from_json(read_text(config_file));
    if (log_file.empty()) log_file = out + ".log.ndjson";

    if (fs::path(log_file).has_parent_path()) fs::create_directories(fs::path(log_file).parent_path());
    std::ofstream log(log_file, std::ios::binary);
    if (!log) throw std::runtime_error("cannot write " + log_file);
    const auto res = train(cfg, [&](const TrainLogRecord& r) {
        log << to_ndjson(r) << "\n";
        log.flush();
        std::cerr << "step " << r.step << "  loss " << r.loss << "  eps " << r.epsilon;
        if (r.validation_mean) std::cerr << "  val " << *r.validation_mean;
        std::cerr << "\n";
    });
    save_checkpoint(out, cfg.network, res.best_params);
    std::cout << "best validation mean prize " << res.best_validation << " at step " << res.best_step
              << "\ncheckpoint " << out << "\nlog " << log_file << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bench

std::vector<fs::path> instance_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        if (entry.path().filename() == "manifest.json") continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no instance files in " + dir.string());
    return files;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int run_bench(const std::string& dir, const std::string& methods_list, const SolverFlags& flags,
              const std::string& out) {
    const auto names = split_list(methods_list);
    if (names.empty()) throw UsageError("--methods must name at least one method");
    std::vector<Method> methods;
    for (const auto& n : names) methods.push_back(require_method(n));

    const auto files = instance_files(dir);
    std::vector<Instance> instances;
    instances.reserve(files.size());
    for (const auto& f : files) instances.push_back(read_instance(f));

    const auto model = load_model(flags);
    const auto base = make_options(flags, model);
    for (Method m : methods) require_checkpoint(m, base);

    std::vector<MethodTotals> totals;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        std::vector<double> prize(instances.size());
        const auto t0 = std::chrono::steady_clock::now();
        parallel_for(instances.size(), flags.threads, [&](std::size_t i) {
            SolveOptions opts = base;
            opts.seed = derive_seed(base.seed, i);
            prize[i] = solve(instances[i], methods[mi], opts).best_path.prize();
        });
        const double elapsed = flags.omit_timing ? 0.0 : seconds_since(t0);
        double sum = 0.0;
        for (double p : prize) sum += p;
        totals.push_back({names[mi], sum / static_cast<double>(prize.size()), elapsed});
    }
    const auto rows = make_bench_rows(totals);
    std::cout << bench_pretty(rows);
    if (!out.empty()) write_text(out, bench_csv(rows));
    return 0;
}

// ---------------------------------------------------------------------------
// render

int run_render(const std::string& instance_file, const std::string& solution_file, const std::string& out) {
    const Instance inst = read_instance(instance_file);
    json rec;
    try {
        rec = json::parse(read_text(solution_file));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("solution record: ") + e.what());
    }
    if (!rec.contains("path")) throw ParseError("solution record has no \"path\" field");
    const auto path = rec.at("path").get<std::vector<NodeId>>();
    write_text(out, render_svg(inst, path));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Orienteering problem toolkit: cost-level beam search with learned heuristics"};
    app.require_subcommand(1);

    GenFlags gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate random Euclidean instances");
    gen_cmd->add_option("--n", gen.n, "Node count including the depot")->capture_default_str()->check(CLI::Range(2, 100000));
    gen_cmd->add_option("--kind", gen.kind, "Prize kind: constant, uniform, distance")->capture_default_str();
    gen_cmd->add_option("--t-max", gen.t_max, "Budget (default 2/3/4 for n=20/50/100)");
    gen_cmd->add_option("--count", gen.count, "Number of instances")->capture_default_str()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "Seed of the first instance")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();

    std::string solve_instance, solve_method, solve_out;
    SolverFlags solve_flags;
    auto* solve_cmd = app.add_subcommand("solve", "Solve one instance file");
    solve_cmd->add_option("instance", solve_instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--method", solve_method,
                          "exact, random, tsili-greedy, tsili-beam, dqn-greedy, dqn-beam, cs")
        ->required();
    solve_flags.add_to(solve_cmd);
    solve_cmd->add_option("--out", solve_out, "Write the solution record here instead of stdout");

    std::string train_config, train_out, train_log;
    bool print_defaults = false;
    auto* train_cmd = app.add_subcommand("train", "Train a q-network with double Q-learning");
    train_cmd->add_option("--config", train_config, "Training config JSON")->check(CLI::ExistingFile);
    train_cmd->add_flag("--print-defaults", print_defaults, "Print the default config and exit");
    train_cmd->add_option("--out", train_out, "Checkpoint file to write");
    train_cmd->add_option("--log", train_log, "NDJSON training log (default <out>.log.ndjson)");

    std::string bench_dir, bench_methods = "random,tsili-greedy,tsili-beam,cs", bench_out;
    SolverFlags bench_flags;
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark methods over a directory of instances");
    bench_cmd->add_option("dir", bench_dir, "Instance directory (from gen)")->required();
    bench_cmd->add_option("--methods", bench_methods, "Comma-separated method list")->capture_default_str();
    bench_flags.add_to(bench_cmd);
    bench_cmd->add_option("--out", bench_out, "CSV output file");

    std::string render_instance, render_solution, render_out;
    auto* render_cmd = app.add_subcommand("render", "Plot a solution as SVG");
    render_cmd->add_option("instance", render_instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
    render_cmd->add_option("solution", render_solution, "Solution record from solve")->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--out", render_out, "SVG file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*gen_cmd) return run_gen(gen);
        if (*solve_cmd) return run_solve(solve_instance, solve_method, solve_flags, solve_out);
        if (*train_cmd) return run_train(train_config, print_defaults, train_out, train_log);
        if (*bench_cmd) return run_bench(bench_dir, bench_methods, bench_flags, bench_out);
        if (*render_cmd) return run_render(render_instance, render_solution, render_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
