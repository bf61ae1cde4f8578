#include "itrm/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "itrm/coding.hpp"
#include "itrm/gadgets.hpp"
#include "itrm/isa.hpp"
#include "itrm/oracle.hpp"
#include "itrm/vm.hpp"

namespace itrm::cli {

namespace {

Program load_program(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open program file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_program(buf.str(), path);
}

int outcome_exit(const RunOutcome& outcome) {
    if (std::holds_alternative<Halted>(outcome)) return kExitOk;
    if (std::holds_alternative<NonHalting>(outcome)) return kExitNonHalting;
    return kExitExhausted;
}

struct BudgetOpts {
    uint64_t steps = Budgets{}.successor_steps;
    uint32_t max_level = Budgets{}.max_level;

    void attach(CLI::App* cmd) {
        cmd->add_option("--steps", steps, "successor-step budget");
        cmd->add_option("--max-level", max_level, "acceleration level budget");
    }
    Budgets budgets() const { return Budgets{steps, max_level, 4096, 10000}; }
};

int cmd_run(const std::string& program_path, const std::string& oracle_spec, uint64_t input,
            const BudgetOpts& bo, const std::string& trace_path, std::ostream& out) {
    Program p = load_program(program_path);
    OraclePtr o = parse_oracle_spec(oracle_spec, coding::structure_code_loader());
    RunResult result = run(p, o, input, bo.budgets());
    out << to_string(result.outcome) << "\n";
    if (!trace_path.empty()) {
        std::ofstream tf(trace_path);
        if (!tf) throw std::invalid_argument("cannot open trace file: " + trace_path);
        result.trace.write_jsonl(tf);
    }
    return outcome_exit(result.outcome);
}

int cmd_fmt(const std::string& program_path, std::ostream& out) {
    out << print_program(load_program(program_path));
    return kExitOk;
}

int cmd_check(const std::string& program_path, std::ostream& out) {
    Program p = load_program(program_path);
    auto diags = validate(p);
    for (const auto& d : diags)
        out << "line " << d.line << ": " << d.message << "\n";
    return diags.empty() ? kExitOk : kExitDiagnostics;
}

int cmd_gen(const std::string& name, const std::vector<std::string>& params,
            std::ostream& out) {
    Program p = [&]() -> Program {
        auto want = [&](size_t n, const char* usage) {
            if (params.size() != n)
                throw std::invalid_argument(std::string("gen ") + name + ": expected " + usage);
        };
        if (name == "flag-counter") {
            want(0, "no parameters");
            return gadgets::flag_counter();
        }
        if (name == "nested-flag-counter") {
            want(0, "no parameters");
            return gadgets::nested_flag_counter();
        }
        if (name == "eq-recognizer") {
            want(1, "<oracle-spec>");
            return gadgets::equality_recognizer(parse_oracle_spec(params[0]));
        }
        if (name == "join-recognizer") {
            want(2, "<oracle-spec> <oracle-spec>");
            return gadgets::join_recognizer(parse_oracle_spec(params[0]),
                                            parse_oracle_spec(params[1]));
        }
        if (name == "fo") {
            want(1, "<formula>");
            return gadgets::fo_compile(gadgets::Formula::parse(params[0]));
        }
        if (name == "decode-naturals") {
            want(1, "<limit>");
            return gadgets::decode_naturals(
                static_cast<uint32_t>(std::stoul(params[0])));
        }
        throw std::invalid_argument(
            "unknown gadget '" + name +
            "' (known: flag-counter, nested-flag-counter, eq-recognizer, "
            "join-recognizer, fo, decode-naturals)");
    }();
    out << "# gadget: " << name << "\n";
    if (!params.empty()) {
        out << "# params:";
        for (const auto& s : params) out << " " << s;
        out << "\n";
    }
    out << print_program(p);
    return kExitOk;
}

int cmd_recognize(const std::string& program_path, const std::vector<std::string>& members,
                  size_t target, const BudgetOpts& bo, std::ostream& out) {
    Program p = load_program(program_path);
    std::vector<OraclePtr> family;
    for (const auto& spec : members)
        family.push_back(parse_oracle_spec(spec, coding::structure_code_loader()));
    if (target >= family.size()) throw std::invalid_argument("target index out of range");
    auto report = gadgets::check_recognizer(p, family, target, bo.budgets());
    for (size_t i = 0; i < family.size(); ++i) {
        out << "member " << i << " " << family[i]->to_string()
            << (i == target ? " (target)" : "") << ": " << to_string(report.outcomes[i])
            << "\n";
    }
    switch (report.verdict) {
        case gadgets::RecognizerReport::Verdict::Pass:
            out << "verdict: PASS\n";
            return kExitOk;
        case gadgets::RecognizerReport::Verdict::Fail:
            out << "verdict: FAIL\n";
            return kExitDiagnostics;
        case gadgets::RecognizerReport::Verdict::Inconclusive:
            out << "verdict: INCONCLUSIVE\n";
            return kExitInconclusive;
    }
    return kExitUsage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Infinite Time Register Machine toolchain"};
    app.require_subcommand(1);

    std::string program_path, oracle_spec = "finite{}", trace_path;
    uint64_t input = 0;
    BudgetOpts bo;

    auto* c_run = app.add_subcommand("run", "assemble and run a program");
    c_run->add_option("program", program_path, "assembly file")->required();
    c_run->add_option("--oracle", oracle_spec, "oracle spec (default finite{})");
    c_run->add_option("--input", input, "initial content of register 1");
    c_run->add_option("--trace", trace_path, "write a JSONL trace to this file");
    bo.attach(c_run);

    auto* c_fmt = app.add_subcommand("fmt", "print a program in canonical form");
    c_fmt->add_option("program", program_path, "assembly file")->required();

    auto* c_check = app.add_subcommand("check", "validate a program");
    c_check->add_option("program", program_path, "assembly file")->required();

    std::string gadget_name;
    std::vector<std::string> gadget_params;
    auto* c_gen = app.add_subcommand("gen", "emit a generated program");
    c_gen->add_option("gadget", gadget_name, "gadget name")->required();
    c_gen->add_option("params", gadget_params, "gadget parameters");

    std::vector<std::string> members;
    size_t target = 0;
    std::string rec_program;
    auto* c_rec = app.add_subcommand("recognize", "run a recognizer against an oracle family");
    c_rec->add_option("program", rec_program, "assembly file")->required();
    c_rec->add_option("--member", members, "oracle spec (repeatable)")->required();
    c_rec->add_option("--target", target, "index of the member to be recognized");
    bo.attach(c_rec);

    std::vector<const char*> argv;
    argv.push_back("itrm");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (c_run->parsed()) return cmd_run(program_path, oracle_spec, input, bo, trace_path, out);
        if (c_fmt->parsed()) return cmd_fmt(program_path, out);
        if (c_check->parsed()) return cmd_check(program_path, out);
        if (c_gen->parsed()) return cmd_gen(gadget_name, gadget_params, out);
        if (c_rec->parsed()) return cmd_recognize(rec_program, members, target, bo, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace itrm::cli
