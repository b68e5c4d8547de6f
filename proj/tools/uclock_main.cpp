// uclock: universal-circuit locking toolkit.
//
// Subcommands: parse, unroll, obfuscate, attack, verify, metrics, bench.
// Exit codes: 0 success, 1 negative attack result (all attacks timed out),
// 2 usage/input error, 3 internal invariant violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "uclock/attacks.hpp"
#include "uclock/cnf.hpp"
#include "uclock/config.hpp"
#include "uclock/fabric.hpp"
#include "uclock/metrics.hpp"
#include "uclock/netlist.hpp"
#include "uclock/solver.hpp"
#include "uclock/transform.hpp"

namespace fs = std::filesystem;
using namespace uclock;

namespace {

SolveOptions solver_options(const RunConfig& config)
{
    SolveOptions opts;
    if (config.solver == "external") {
        opts.backend = SolveOptions::Backend::External;
        opts.external_cmd = config.external_cmd;
    }
    return opts;
}

Netlist oracle_netlist(const std::string& path, int frames)
{
    Netlist net = parse_bench_file(path);
    if (net.is_combinational() && frames == 1)
        return unroll(net, 1); // frame suffixes keep port names aligned with the locked side
    return unroll(net, frames);
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path);
    out << text;
}

struct ObfuscateArtifacts {
    fs::path locked, key, fabric;
};

ObfuscateArtifacts obfuscate_to_dir(const RunConfig& config, const std::string& circuit_path)
{
    Netlist net = parse_bench_file(circuit_path);
    Netlist comb = unroll(net, config.frames);
    Obfuscated result =
        obfuscate(comb, config.k, config.slack, config.seed,
                  config.greedy_luts ? LutMapMode::Greedy : LutMapMode::PerGate);

    fs::create_directories(config.out_dir);
    ObfuscateArtifacts files;
    std::string stem = net.name.empty() ? "circuit" : net.name;
    files.locked = fs::path(config.out_dir) / (stem + "_locked.bench");
    files.key = fs::path(config.out_dir) / (stem + "_key.txt");
    files.fabric = fs::path(config.out_dir) / (stem + "_fabric.json");

    write_bench_file(result.locked.net, files.locked.string());
    write_bitstream_file(result.key, files.key.string());
    write_text(files.fabric.string(), fabric_to_json(result.fabric));

    std::cout << stem << ": key length " << result.key.size() << ", locked gates "
              << result.locked.net.gates.size() << ", poles " << result.fabric.n_poles
              << ", data inputs " << result.locked.net.inputs.size() - result.key.size()
              << "\n";
    return files;
}

AttackRecord run_one_attack(const std::string& attack_id, const LockedNetlist& locked,
                            Oracle& oracle, const std::optional<Bitstream>& true_key,
                            const RunConfig& config)
{
    AttackRecord rec;
    if (attack_id == "sat") {
        SatAttackOptions opts;
        opts.budget_sec = config.budget_sec;
        opts.solver = solver_options(config);
        opts.keep_dip_trace = config.dump_dips;
        rec = sat_attack(locked, oracle, opts);
    } else if (attack_id == "appsat") {
        AppSatOptions opts;
        opts.budget_sec = config.budget_sec;
        opts.solver = solver_options(config);
        opts.dip_period = config.appsat_dip_period;
        opts.sample_count = config.appsat_samples;
        opts.error_threshold = config.appsat_eps;
        opts.seed = config.seed;
        opts.keep_dip_trace = config.dump_dips;
        rec = appsat_attack(locked, oracle, opts);
    } else if (attack_id == "scope") {
        ScopeOptions opts;
        opts.margin = config.scope_margin;
        auto t0 = std::chrono::steady_clock::now();
        ScopeResult scope = scope_attack(locked, opts);
        rec.circuit = locked.net.name;
        rec.attack = "scope";
        rec.key_size = locked.key_bits;
        rec.status = AttackStatus::Guess;
        rec.cope_percent = scope.cope_percent;
        rec.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CnfFormula cnf = tseitin_encode(locked.net);
        rec.cnf_vars = cnf.num_vars;
        rec.cnf_clauses = cnf.num_clauses();
        if (true_key) {
            std::int64_t correct = 0;
            for (int b = 0; b < locked.key_bits; ++b)
                if (scope.guesses[b] >= 0 &&
                    scope.guesses[b] == (true_key->bits[b] ? 1 : 0))
                    ++correct;
            rec.bits_matched = correct;
        }
    } else if (attack_id == "guess-random" || attack_id == "guess-hillclimb") {
        if (!true_key)
            throw InputError(attack_id + " needs --key (the true key) for scoring");
        GuessOptions opts;
        opts.trials = config.guess_trials;
        opts.seed = config.seed;
        opts.mode = attack_id == "guess-random" ? GuessMode::Random : GuessMode::HillClimb;
        rec = guess_attack(&locked, *true_key, opts, &oracle);
        rec.circuit = locked.net.name;
        CnfFormula cnf = tseitin_encode(locked.net);
        rec.cnf_vars = cnf.num_vars;
        rec.cnf_clauses = cnf.num_clauses();
    } else {
        throw InputError("unknown attack id: " + attack_id +
                         " (ids atpg/smt/ddip/icy/bbo are reserved for ingested tables)");
    }
    if (true_key && rec.recovered_key && !rec.bits_matched)
        rec.bits_matched = key_agreement(*rec.recovered_key, *true_key);
    return rec;
}

void dump_dip_trace(const AttackRecord& rec, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    for (const auto& dip : rec.dip_trace) {
        for (bool b : dip)
            out << (b ? '1' : '0');
        out << "\n";
    }
}

int cmd_attack_run(const RunConfig& config, const std::string& locked_path,
                   const std::string& oracle_path, const std::string& key_path)
{
    LockedNetlist locked = parse_locked_bench_file(locked_path);
    Oracle oracle(oracle_netlist(oracle_path, config.frames));
    std::optional<Bitstream> true_key;
    if (!key_path.empty()) {
        true_key = bitstream_from_file(key_path);
        if (static_cast<int>(true_key->bits.size()) != locked.key_bits)
            throw InputError("true key length does not match the locked netlist");
    }

    fs::create_directories(fs::path(config.out_dir) / "records");
    bool any_not_timeout = false;
    for (const auto& attack_id : config.attacks) {
        AttackRecord rec = run_one_attack(attack_id, locked, oracle, true_key, config);
        any_not_timeout |= rec.status != AttackStatus::Timeout;
        fs::path rec_path =
            fs::path(config.out_dir) / "records" / (rec.circuit + "__" + rec.attack + ".json");
        write_text(rec_path.string(), attack_record_to_json(rec));
        if (config.dump_dips && !rec.dip_trace.empty())
            dump_dip_trace(rec, fs::path(config.out_dir) / "records" /
                                    (rec.circuit + "__" + rec.attack + ".dips"));
        std::cout << rec.circuit << " " << rec.attack << ": "
                  << attack_status_name(rec.status);
        if (rec.dip_count)
            std::cout << ", dips " << *rec.dip_count;
        if (rec.bits_matched)
            std::cout << ", bits " << *rec.bits_matched << "/" << rec.key_size;
        if (rec.cope_percent)
            std::cout << ", cope " << *rec.cope_percent << "%";
        std::cout << ", " << rec.time_s << "s\n";
    }
    return any_not_timeout ? 0 : 1;
}

std::vector<AttackRecord> load_records_dir(const std::string& dir)
{
    std::vector<AttackRecord> records;
    if (!fs::exists(dir))
        return records;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        records.push_back(attack_record_from_json(ss.str()));
    }
    return records;
}

int cmd_metrics_run(const RunConfig& config, const std::string& records_dir,
                    const std::string& paper_csv,
                    const std::map<std::string, std::int64_t>& baselines)
{
    std::vector<AttackRecord> records = load_records_dir(records_dir);
    if (!paper_csv.empty()) {
        auto ingested = ingest_paper_table_file(paper_csv);
        records.insert(records.end(), ingested.begin(), ingested.end());
    }
    MetricsReport report = compute_metrics(records, baselines);
    for (const auto& w : report.warnings)
        std::cerr << "warning: " << w << "\n";

    fs::create_directories(config.out_dir);
    fs::path csv = fs::path(config.out_dir) / "metrics.csv";
    fs::path json = fs::path(config.out_dir) / "metrics.json";
    write_report_file(report.rows, csv.string(), ReportFormat::Csv);
    write_report_file(report.rows, json.string(), ReportFormat::Json);
    std::cout << "wrote " << report.rows.size() << " metric rows to " << csv.string() << " and "
              << json.string() << "\n";
    return 0;
}

int cmd_bench_run(RunConfig config)
{
    config.validate_config();
    if (config.circuits.empty())
        throw InputError("bench: no circuits configured");
    if (config.attacks.empty())
        throw InputError("bench: no attacks configured");

    std::mutex io_mutex;
    std::map<std::string, std::int64_t> baselines;
    bool any_not_timeout = false;

    auto run_circuit = [&](const std::string& circuit_path) {
        Netlist net = parse_bench_file(circuit_path);
        Netlist comb = unroll(net, config.frames);
        Obfuscated result =
            obfuscate(comb, config.k, config.slack, config.seed,
                      config.greedy_luts ? LutMapMode::Greedy : LutMapMode::PerGate);
        std::string stem = net.name.empty() ? "circuit" : net.name;

        fs::create_directories(fs::path(config.out_dir) / "records");
        write_bench_file(result.locked.net,
                         (fs::path(config.out_dir) / (stem + "_locked.bench")).string());
        write_bitstream_file(result.key,
                             (fs::path(config.out_dir) / (stem + "_key.txt")).string());
        write_text((fs::path(config.out_dir) / (stem + "_fabric.json")).string(),
                   fabric_to_json(result.fabric));

        std::int64_t base = tseitin_encode(comb).num_clauses();
        Oracle oracle(comb);

        for (const auto& attack_id : config.attacks) {
            AttackRecord rec =
                run_one_attack(attack_id, result.locked, oracle, result.key, config);
            rec.circuit = stem;
            std::lock_guard<std::mutex> lock(io_mutex);
            any_not_timeout |= rec.status != AttackStatus::Timeout;
            baselines[stem] = base;
            write_text((fs::path(config.out_dir) / "records" /
                        (stem + "__" + rec.attack + ".json"))
                           .string(),
                       attack_record_to_json(rec));
            std::cout << stem << " " << rec.attack << ": " << attack_status_name(rec.status)
                      << ", " << rec.time_s << "s\n";
        }
    };

    if (config.workers <= 1) {
        for (const auto& c : config.circuits)
            run_circuit(c);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex next_mutex;
        std::vector<std::exception_ptr> errors;
        for (int w = 0; w < config.workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    std::string circuit;
                    {
                        std::lock_guard<std::mutex> lock(next_mutex);
                        if (next >= config.circuits.size())
                            return;
                        circuit = config.circuits[next++];
                    }
                    try {
                        run_circuit(circuit);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(io_mutex);
                        errors.push_back(std::current_exception());
                        return;
                    }
                }
            });
        }
        for (auto& t : pool)
            t.join();
        if (!errors.empty())
            std::rethrow_exception(errors.front());
    }

    cmd_metrics_run(config, (fs::path(config.out_dir) / "records").string(), "", baselines);
    return any_not_timeout ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"universal-circuit locking toolkit"};
    app.require_subcommand(1);

    RunConfig config;
    std::string config_path;

    // Shared flags, attached per subcommand as needed.
    auto add_fabric_flags = [&](CLI::App* cmd) {
        cmd->add_option("--frames", config.frames, "unroll depth T");
        cmd->add_option("--k", config.k, "LUT fan-in");
        cmd->add_option("--slack", config.slack, "extra poles beyond the LUT count");
        cmd->add_option("--seed", config.seed, "seed for programming randomness");
        cmd->add_flag("--greedy", config.greedy_luts, "merge single-fan-out LUTs");
    };
    auto add_solver_flags = [&](CLI::App* cmd) {
        cmd->add_option("--budget-sec", config.budget_sec, "attack/solve budget in seconds");
        cmd->add_option("--solver", config.solver, "embedded|external")
            ->check(CLI::IsMember({"embedded", "external"}));
        cmd->add_option("--solver-cmd", config.external_cmd,
                        "external solver command (default $UCLOCK_SAT_SOLVER)");
    };

    // parse
    std::string in_path, out_path;
    auto* parse_cmd = app.add_subcommand("parse", "parse and validate a .bench netlist");
    parse_cmd->add_option("bench", in_path, "input .bench file")->required();
    parse_cmd->add_option("--out", out_path, "re-serialize to this file");

    // unroll
    auto* unroll_cmd = app.add_subcommand("unroll", "unroll a sequential netlist");
    unroll_cmd->add_option("bench", in_path, "input .bench file")->required();
    unroll_cmd->add_option("--frames", config.frames, "frame count")->required();
    unroll_cmd->add_option("--out", out_path, "output .bench file")->required();

    // obfuscate
    auto* obf_cmd = app.add_subcommand("obfuscate", "unroll and embed into a UC fabric");
    obf_cmd->add_option("bench", in_path, "input .bench file")->required();
    add_fabric_flags(obf_cmd);
    obf_cmd->add_option("--out", config.out_dir, "output directory");

    // verify
    std::string locked_path, key_path, oracle_path;
    auto* verify_cmd = app.add_subcommand("verify", "check a key against the original circuit");
    verify_cmd->add_option("--locked", locked_path)->required();
    verify_cmd->add_option("--key", key_path)->required();
    verify_cmd->add_option("--oracle", oracle_path, "original .bench (unrolled with --frames)")
        ->required();
    verify_cmd->add_option("--frames", config.frames, "unroll depth for the oracle");
    add_solver_flags(verify_cmd);

    // attack
    auto* attack_cmd = app.add_subcommand("attack", "run attacks against a locked netlist");
    attack_cmd->add_option("--locked", locked_path)->required();
    attack_cmd->add_option("--oracle", oracle_path, "original .bench (unrolled with --frames)")
        ->required();
    attack_cmd->add_option("--key", key_path, "true key for guess scoring");
    attack_cmd->add_option("--attack", config.attacks, "attack id (repeatable)")->required();
    attack_cmd->add_option("--frames", config.frames, "unroll depth for the oracle");
    attack_cmd->add_option("--seed", config.seed, "attack seed");
    attack_cmd->add_option("--trials", config.guess_trials, "guess attack trials");
    attack_cmd->add_option("--out", config.out_dir, "output directory");
    attack_cmd->add_flag("--dump-dips", config.dump_dips, "write the DIP trace per attack");
    add_solver_flags(attack_cmd);

    // metrics
    std::string records_dir, paper_csv;
    auto* metrics_cmd = app.add_subcommand("metrics", "compute metric rows from records");
    metrics_cmd->add_option("--records", records_dir, "directory of AttackRecord JSON files");
    metrics_cmd->add_option("--ingest-paper", paper_csv, "transcribed published-table CSV");
    metrics_cmd->add_option("--out", config.out_dir, "output directory");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "configured benchmark matrix");
    bench_cmd->add_option("--config", config_path, "run configuration file")->required();
    bench_cmd->add_option("--workers", config.workers, "parallel circuits");
    bench_cmd->add_option("--out", config.out_dir, "output directory");
    add_fabric_flags(bench_cmd);
    add_solver_flags(bench_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (parse_cmd->parsed()) {
            Netlist net = parse_bench_file(in_path);
            std::cout << net.name << ": " << net.inputs.size() << " inputs, "
                      << net.outputs.size() << " outputs, " << net.gates.size() << " gates, "
                      << net.flops.size() << " flops\n";
            if (!out_path.empty())
                write_bench_file(net, out_path);
            return 0;
        }
        if (unroll_cmd->parsed()) {
            Netlist net = parse_bench_file(in_path);
            Netlist comb = unroll(net, config.frames);
            write_bench_file(comb, out_path);
            std::cout << comb.name << ": " << comb.inputs.size() << " inputs, "
                      << comb.outputs.size() << " outputs, " << comb.gates.size() << " gates\n";
            return 0;
        }
        if (obf_cmd->parsed()) {
            obfuscate_to_dir(config, in_path);
            return 0;
        }
        if (verify_cmd->parsed()) {
            LockedNetlist locked = parse_locked_bench_file(locked_path);
            Bitstream key = bitstream_from_file(key_path);
            Netlist original = oracle_netlist(oracle_path, config.frames);
            KeyCheck check = verify_key(locked, key, original, solver_options(config));
            std::cout << (check.ok ? "equivalent" : "NOT equivalent") << " (method: "
                      << (check.method == VerifyMethod::Exhaustive ? "exhaustive" : "miter")
                      << ")\n";
            return check.ok ? 0 : 1;
        }
        if (attack_cmd->parsed()) {
            config.validate_config();
            return cmd_attack_run(config, locked_path, oracle_path, key_path);
        }
        if (metrics_cmd->parsed()) {
            if (records_dir.empty() && paper_csv.empty())
                throw InputError("metrics: need --records and/or --ingest-paper");
            return cmd_metrics_run(config, records_dir, paper_csv, {});
        }
        if (bench_cmd->parsed()) {
            // File values first; any flag the user actually set overrides.
            RunConfig merged = load_config(config_path);
            if (bench_cmd->count("--workers"))
                merged.workers = config.workers;
            if (bench_cmd->count("--out"))
                merged.out_dir = config.out_dir;
            if (bench_cmd->count("--frames"))
                merged.frames = config.frames;
            if (bench_cmd->count("--k"))
                merged.k = config.k;
            if (bench_cmd->count("--slack"))
                merged.slack = config.slack;
            if (bench_cmd->count("--seed"))
                merged.seed = config.seed;
            if (bench_cmd->count("--greedy"))
                merged.greedy_luts = config.greedy_luts;
            if (bench_cmd->count("--budget-sec"))
                merged.budget_sec = config.budget_sec;
            if (bench_cmd->count("--solver"))
                merged.solver = config.solver;
            if (bench_cmd->count("--solver-cmd"))
                merged.external_cmd = config.external_cmd;
            return cmd_bench_run(merged);
        }
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
