// tempo: dense-time model checking for networks of timed automata.
//
//   tempo check <model> --query <text|@file> [--direction forward|backward|both]
//   tempo gen t2pc --participants <k> [--params <file>] [--spec <id>]
//   tempo replay <model> <trace>
//   tempo bench t2pc --participants 1,2,3 [--specs all] [--direction both]
//
// Exit codes: 0 valid, 1 invalid, 2 error, 3 out of memory.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tempo/model_parser.hpp"
#include "tempo/t2pc.hpp"
#include "tempo/tctl.hpp"

namespace {

using nlohmann::json;
using namespace tempo;

constexpr int kExitValid = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitError = 2;
constexpr int kExitOutOfMemory = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Network load_model(const std::string& path) {
    ParseResult r = parse_model(slurp(path));
    for (const auto& d : r.diagnostics)
        std::cerr << path << ":" << d.line << ": " << (d.error ? "error: " : "warning: ")
                  << d.message << "\n";
    if (!r.ok()) throw std::runtime_error("model has errors");
    return *r.network;
}

std::string resolve_query(const std::string& spec) {
    std::string q = spec;
    if (!q.empty() && q[0] == '@') q = slurp(q.substr(1));
    while (!q.empty() && std::isspace(static_cast<unsigned char>(q.back()))) q.pop_back();
    return q;
}

struct Row {
    std::string name;
    std::string query;
    std::string direction;
    Status status = Status::Unknown;
    ExploreStats stats;
    std::string witness_path;
    int participants = 0;  // bench rows only
    int processes = 0;
};

void print_row(const Row& r, bool as_json, std::ostream& os) {
    if (as_json) {
        json j{{"spec", r.name},
               {"query", r.query},
               {"direction", r.direction},
               {"status", status_text(r.status)},
               {"states", r.stats.states_explored},
               {"zones", r.stats.zones_stored},
               {"time_ms", r.stats.wall_ms}};
        if (r.processes) {
            j["participants"] = r.participants;
            j["processes"] = r.processes;
        }
        if (!r.witness_path.empty()) j["witness"] = r.witness_path;
        os << j.dump() << "\n";
    } else {
        os << r.name << ": " << status_text(r.status) << "  [" << r.direction
           << ", states=" << r.stats.states_explored << ", zones=" << r.stats.zones_stored
           << ", " << static_cast<long>(r.stats.wall_ms) << " ms]";
        if (!r.witness_path.empty()) os << "  witness: " << r.witness_path;
        os << "\n";
    }
}

int run_check(const std::string& model_path, const std::string& query_spec,
              const std::string& direction, const std::string& trace_out, bool as_json) {
    Network net = load_model(model_path);
    std::string query = resolve_query(query_spec);
    TctlPtr f = parse_query(net, query);

    auto run_one = [&](CheckEngine engine) { return check(net, *f, {engine, 0, true}); };

    Verdict v;
    if (direction == "both") {
        Verdict fwd = run_one(CheckEngine::Forward);
        Verdict bwd = run_one(CheckEngine::Backward);
        if (fwd.status != bwd.status) {
            std::cerr << "error: forward and backward analyses disagree ("
                      << status_text(fwd.status) << " vs " << status_text(bwd.status) << ")\n";
            return kExitError;
        }
        v = std::move(fwd);
    } else if (direction == "backward") {
        v = run_one(CheckEngine::Backward);
    } else {
        v = run_one(CheckEngine::Forward);
    }

    Row row{"query", query, direction, v.status, v.stats, ""};
    if (v.witness && !trace_out.empty()) {
        std::ofstream out(trace_out);
        out << v.witness->to_text(net);
        row.witness_path = trace_out;
    }
    print_row(row, as_json, std::cout);
    return v.status == Status::Valid ? kExitValid : kExitInvalid;
}

int run_gen(int participants, const std::string& params_path, const std::string& spec) {
    t2pc::Config cfg;
    if (!params_path.empty()) cfg = t2pc::parse_params(slurp(params_path));
    t2pc::Deadlines d = cfg.resolve();
    if (!spec.empty()) {
        auto id = t2pc::spec_by_name(spec);
        if (!id) throw std::runtime_error("unknown spec '" + spec + "'");
        std::cout << t2pc::spec_formula(*id, participants, d, cfg.params.D) << "\n";
        return kExitValid;
    }
    Network net = t2pc::build_t2pc(participants, cfg.params, d);
    std::cout << net.serialize();
    return kExitValid;
}

int run_replay(const std::string& model_path, const std::string& trace_path) {
    Network net = load_model(model_path);
    std::string err;
    auto trace = Trace::from_text(net, slurp(trace_path), &err);
    if (!trace) {
        std::cerr << "error: " << err << "\n";
        return kExitError;
    }
    ReplayResult r = replay(net, *trace);
    if (r.ok) {
        std::cout << "trace is a legal execution\n";
        return kExitValid;
    }
    std::cout << "trace rejected at step " << r.failing_step << ": " << r.message << "\n";
    return kExitInvalid;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
    return out;
}

int run_bench(const std::string& participants_csv, const std::string& specs_csv,
              const std::string& params_path, const std::string& direction, bool as_json) {
    t2pc::Config cfg;
    if (!params_path.empty()) cfg = t2pc::parse_params(slurp(params_path));
    t2pc::Deadlines d = cfg.resolve();

    std::vector<t2pc::SpecId> specs;
    if (specs_csv == "all" || specs_csv.empty()) {
        specs = t2pc::all_specs();
    } else {
        std::istringstream in(specs_csv);
        std::string item;
        while (std::getline(in, item, ',')) {
            auto id = t2pc::spec_by_name(item);
            if (!id) throw std::runtime_error("unknown spec '" + item + "'");
            specs.push_back(*id);
        }
    }

    bool disagreement = false;
    for (int k : parse_int_list(participants_csv)) {
        Network net = t2pc::build_t2pc(k, cfg.params, d);
        std::vector<int> consts = model_max_constants(net);
        std::vector<std::pair<t2pc::SpecId, TctlPtr>> formulas;
        for (t2pc::SpecId id : specs) {
            auto f = parse_query(net, t2pc::spec_formula(id, k, d, cfg.params.D));
            query_max_constants(*f, consts);
            formulas.emplace_back(id, f);
        }

        // One shared symbolic universe per size; the per-query satisfaction
        // sets are evaluated on top of it.
        std::optional<TctlChecker> shared;
        auto ensure_shared = [&]() -> TctlChecker& {
            if (!shared) shared.emplace(net, consts);
            return *shared;
        };

        if (!as_json)
            std::cout << "-- t2pc k=" << k << " (" << net.process_count() << " processes, "
                      << net.clock_count() << " clocks)\n";
        for (auto& [id, f] : formulas) {
            Row row;
            row.name = t2pc::spec_name(id);
            row.query = t2pc::spec_formula(id, k, d, cfg.params.D);
            row.direction = direction;
            row.participants = k;
            row.processes = net.process_count();
            auto red = check_detail::reducible(*f);
            bool reducible = red.kind != check_detail::Reduction::None;
            auto t0 = std::chrono::steady_clock::now();
            if (reducible && (direction == "forward" || direction == "backward" ||
                              direction == "both")) {
                auto target = check_detail::as_target(net, red.pred);
                std::optional<Verdict> fwd, bwd;
                if (direction != "backward") fwd = forward_reach(net, consts, target);
                if (direction != "forward") bwd = backward_reach(net, consts, target);
                Verdict v = fwd ? *fwd : *bwd;
                if (fwd && bwd && fwd->status != bwd->status) disagreement = true;
                if (red.kind == check_detail::Reduction::EfPred)
                    v.status = v.status == Status::Invalid ? Status::Valid : Status::Invalid;
                row.status = v.status;
                row.stats = v.stats;
            } else {
                TctlChecker& checker = ensure_shared();
                auto sat = checker.eval(*f);
                Verdict v = checker.verdict_of(sat);
                row.status = v.status;
                row.stats = v.stats;
            }
            row.stats.wall_ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
            print_row(row, as_json, std::cout);
        }
    }
    if (disagreement) {
        std::cerr << "error: forward and backward analyses disagree\n";
        return kExitError;
    }
    return kExitValid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tempo: dense-time model checking for networks of timed automata"};
    app.require_subcommand(1);

    std::string model_path, query, direction = "forward", trace_out;
    bool as_json = false;

    auto* check_cmd = app.add_subcommand("check", "check a query against a model");
    check_cmd->add_option("model", model_path, "model file")->required();
    check_cmd->add_option("--query", query, "query text, or @file")->required();
    check_cmd->add_option("--direction", direction, "forward|backward|both")
        ->check(CLI::IsMember({"forward", "backward", "both"}));
    check_cmd->add_option("--trace-out", trace_out, "write the witness trace here");
    check_cmd->add_flag("--json", as_json, "machine-readable output");

    int participants = 1;
    std::string params_path, gen_spec, target;
    auto* gen_cmd = app.add_subcommand("gen", "generate a bundled model");
    gen_cmd->add_option("target", target, "what to generate (t2pc)")->required();
    gen_cmd->add_option("--participants", participants, "participant count")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--params", params_path, "protocol parameter file");
    gen_cmd->add_option("--spec", gen_spec, "print one specification query instead");

    std::string trace_path;
    auto* replay_cmd = app.add_subcommand("replay", "validate a trace against a model");
    replay_cmd->add_option("model", model_path, "model file")->required();
    replay_cmd->add_option("trace", trace_path, "trace file")->required();

    std::string participants_csv = "1,2,3", specs_csv = "all";
    auto* bench_cmd = app.add_subcommand("bench", "run the specification suite");
    bench_cmd->add_option("target", target, "what to benchmark (t2pc)")->required();
    bench_cmd->add_option("--participants", participants_csv, "comma-separated sizes");
    bench_cmd->add_option("--specs", specs_csv, "all, or comma-separated spec ids");
    bench_cmd->add_option("--params", params_path, "protocol parameter file");
    bench_cmd->add_option("--direction", direction, "forward|backward|both")
        ->check(CLI::IsMember({"forward", "backward", "both"}));
    bench_cmd->add_flag("--json", as_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check_cmd->parsed()) return run_check(model_path, query, direction, trace_out, as_json);
        if (gen_cmd->parsed()) {
            if (target != "t2pc") throw std::runtime_error("unknown generator '" + target + "'");
            return run_gen(participants, params_path, gen_spec);
        }
        if (replay_cmd->parsed()) return run_replay(model_path, trace_path);
        if (bench_cmd->parsed()) {
            if (target != "t2pc") throw std::runtime_error("unknown target '" + target + "'");
            return run_bench(participants_csv, specs_csv, params_path, direction, as_json);
        }
    } catch (const MemoryLimitError&) {
        std::cerr << "error: out of memory\n";
        return kExitOutOfMemory;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
