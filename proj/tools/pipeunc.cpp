// pipeunc: command-line front end.
//
//   pipeunc simulate --fix-rate 0.5 --mode extremes
//   pipeunc --config data/experiment.ini simulate --seed 7 --output json
//   pipeunc --replay report.json --output table

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "pipeunc/commands.hpp"

namespace
{

using pipeunc::RunConfig;

void add_common(CLI::App& sub, RunConfig& c)
{
    sub.add_option("--seed", c.seed, "Master seed")->capture_default_str();
    sub.add_option("--trials", c.trials, "Trials per recall stream / number of p-box samples")->capture_default_str();
    sub.add_option("--n-items", c.n_items, "Population size N")->capture_default_str();
    sub.add_option("--output", c.output, "Output format")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    sub.add_option("--out", c.out, "Write the report to PATH instead of stdout");
    sub.add_option("--mode", c.mode, "Interval mode")
        ->check(CLI::IsMember({"extremes", "means", "both"}))
        ->capture_default_str();
    sub.add_flag("--timestamp", c.timestamp, "Add a generation timestamp to JSON output");
}

void add_pbox(CLI::App& sub, RunConfig& c)
{
    sub.add_option("--pbox-min", c.pbox.min_a, "Recall p-box minimum")->capture_default_str();
    sub.add_option("--pbox-max", c.pbox.max_b, "Recall p-box maximum")->capture_default_str();
    sub.add_option("--pbox-mean", c.pbox.mean_mu, "Recall p-box mean")->capture_default_str();
    sub.add_option("--evidence", c.evidence, "Evidence CSV; its recall statistics replace the p-box options");
    sub.add_option("--outliers", c.outliers, "Outlier policy for evidence")
        ->check(CLI::IsMember({"none", "iqr"}))
        ->capture_default_str();
    sub.add_option("--iqr-k", c.iqr_k, "Tukey fence multiplier")->capture_default_str();
}

void add_grid(CLI::App& sub, RunConfig& c)
{
    sub.add_option("--prevalence", c.prevalence, "Initial prevalence grid")->delimiter(',')->capture_default_str();
    sub.add_option("--fix-rate", c.fix_rate, "Fixer fix-rate grid")->delimiter(',')->capture_default_str();
    sub.add_option("--precision", c.precision, "Classifier precision")->capture_default_str();
    sub.add_option("--specificity", c.specificity, "Classifier specificity")->capture_default_str();
    sub.add_option("--break-rate", c.break_rate, "Probability the fixer breaks a fixed item")->capture_default_str();
}

std::string timestamp_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int emit(const RunConfig& c)
{
    auto env = pipeunc::run_command(c);
    if (c.timestamp) {
        env["timestamps"] = {{"generated", timestamp_now()}};
    }
    const std::string text = pipeunc::render(env, pipeunc::output_format_of(c));
    if (c.out.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f || !(f << text) || !f.flush()) {
        throw pipeunc::io_error("cannot write '" + c.out + "'");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Recall uncertainty in detect-fix-redetect pipelines"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    app.set_config("--config", "", "INI file with one [section] per subcommand");
    app.set_version_flag("--version", std::string(pipeunc::version));

    std::string replay;
    std::string replay_output = "json";
    std::string replay_out;
    app.add_option("--replay", replay, "Re-run the config embedded in a JSON report");
    app.add_option("--replay-output", replay_output, "Output format for --replay")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    app.add_option("--replay-out", replay_out, "Output path for --replay");

    std::map<std::string, RunConfig> configs;
    for (const char* name : {"analytic", "simulate", "evidence", "case-study", "pbox-sample"}) {
        configs.emplace(name, pipeunc::default_config(name));
    }

    auto* analytic = app.add_subcommand("analytic", "Closed-form pipeline metrics at a point recall");
    {
        auto& c = configs["analytic"];
        add_common(*analytic, c);
        add_grid(*analytic, c);
        add_pbox(*analytic, c);
        analytic->add_option("--recall", c.recall, "Point recall")->capture_default_str();
        analytic->add_flag("--with-pbox", c.with_pbox, "Also push the recall p-box through each cell");
    }

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo intervals under recall uncertainty");
    {
        auto& c = configs["simulate"];
        add_common(*simulate, c);
        add_grid(*simulate, c);
        add_pbox(*simulate, c);
        simulate->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
            ->capture_default_str();
        simulate->add_flag("--trials-out", c.include_trials, "Include per-trial values in JSON output");
    }

    auto* evidence = app.add_subcommand("evidence", "Summarize an evidence CSV and derive its p-box");
    {
        auto& c = configs["evidence"];
        add_common(*evidence, c);
        add_pbox(*evidence, c);
    }

    auto* case_study = app.add_subcommand("case-study", "Worked examples");
    {
        auto& c = configs["case-study"];
        add_common(*case_study, c);
        add_pbox(*case_study, c);
        case_study->add_option("--which", c.which, "Case study")
            ->check(CLI::IsMember({"rule-based", "composed"}))
            ->capture_default_str();
        case_study->add_option("--tools", c.tools, "Tool-record CSV (name,correct,generated)");
        case_study->add_option("--confidence", c.confidence, "Confidence level")->capture_default_str();
        case_study->add_option("--method", c.ci_method, "Proportion interval")
            ->check(CLI::IsMember({"agresti-coull", "wilson"}))
            ->capture_default_str();
        case_study->add_option("--recall", c.recall, "Detector recall")->capture_default_str();
        case_study->add_option("--repair-accuracy", c.repair_accuracy, "Repair accuracy")->capture_default_str();
    }

    auto* pbox_sample = app.add_subcommand("pbox-sample", "Draw paired samples from the recall p-box");
    {
        auto& c = configs["pbox-sample"];
        add_common(*pbox_sample, c);
        add_pbox(*pbox_sample, c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::FileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!replay.empty()) {
            std::ifstream in(replay);
            if (!in) {
                throw pipeunc::io_error("cannot open report '" + replay + "'");
            }
            pipeunc::json env;
            try {
                env = pipeunc::json::parse(in);
            } catch (const pipeunc::json::exception& e) {
                throw pipeunc::invalid_parameter(std::string("report: ") + e.what());
            }
            RunConfig c;
            try {
                c = pipeunc::config_from_json(env.at("config"));
            } catch (const pipeunc::json::exception& e) {
                throw pipeunc::invalid_parameter(std::string("report config: ") + e.what());
            }
            c.output = replay_output;
            c.out = replay_out;
            return emit(c);
        }
        for (auto* sub : app.get_subcommands()) {
            return emit(configs.at(sub->get_name()));
        }
        std::cerr << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pipeunc::exit_code_for(e);
    }
}
