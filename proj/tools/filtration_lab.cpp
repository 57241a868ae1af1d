#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flab/checks.hpp"
#include "flab/error.hpp"
#include "flab/fuzz.hpp"
#include "flab/scenario.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFail = 1;
constexpr int kInputError = 2;

struct Output {
  std::string format = "table";
  std::string out;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw flab::Error(flab::ErrorKind::ParseError, "cannot write '" + path + "'");
  f << text;
}

void emit(const flab::json& report, const Output& o, const std::string& table) {
  std::string dumped = report.dump(2) + "\n";
  std::cout << (o.format == "json" ? dumped : table);
  if (!o.out.empty()) write_file(o.out, dumped);
}

flab::Scenario load(const std::string& path, std::optional<std::uint64_t> seed) {
  flab::Scenario s = flab::load_scenario(path);
  if (seed) s.seed = *seed;
  return s;
}

std::string mrp_table(const flab::json& r) {
  std::ostringstream out;
  out << "basis " << r["basis"].get<std::string>() << " (d=" << r["dimension"] << ")  mrp "
      << (r["mrp"].get<bool>() ? "true" : "false") << "\n";
  out << "node        t  children  rank\n";
  for (const auto& row : r["multiplicity_table"]) {
    std::string id = row["node"];
    out << id << std::string(id.size() < 12 ? 12 - id.size() : 1, ' ') << row["t"] << "  " << row["children"]
        << "         " << row["rank"] << "\n";
  }
  if (!r["failing_atom"].is_null())
    out << "fails at " << r["failing_atom"].get<std::string>() << ", unreachable " << r["witness"].dump() << "\n";
  out << "verdict " << r["verdict"].get<std::string>() << "\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact checks on filtered event trees"};
  app.set_version_flag("--version", std::string(flab::version()));
  app.require_subcommand(1);

  Output o;
  std::optional<std::uint64_t> seed;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Seed for the random integrands (fuzz: first seed)");
    sub->add_option("--out", o.out, "Write the JSON report here (fuzz: a directory)");
    sub->add_option("--format", o.format, "Console format")->check(CLI::IsMember({"json", "table"}));
  };

  std::string path;
  std::vector<std::string> checks;
  bool inject_fault = false;
  auto* run = app.add_subcommand("run", "Run the checks listed in a scenario");
  run->add_option("scenario", path, "Scenario JSON")->required();
  run->add_option("--checks", checks, "Override the scenario's check list")->delimiter(',');
  run->add_flag("--inject-fault", inject_fault, "Perturb the drift multiplier before verifying it");
  common(run);

  flab::FuzzParams fp;
  auto* fuzz = app.add_subcommand("fuzz", "Run checks on random scenarios");
  fuzz->add_option("--count", fp.count, "Number of seeds")->check(CLI::NonNegativeNumber);
  fuzz->add_option("--horizon", fp.tree.horizon, "Tree horizon")->check(CLI::Range(1, 6));
  fuzz->add_option("--branching", fp.tree.max_branching, "Maximum children per node")->check(CLI::Range(1, 9));
  fuzz->add_option("--denominator", fp.tree.denominator_bound, "Probability denominator bound")->check(CLI::Range(1, 64));
  fuzz->add_option("--deficit", fp.basis_deficit, "Basis dimension below branching - 1")->check(CLI::Range(0, 8));
  fuzz->add_option("--checks", fp.checks, "Checks to run (default: every check except viability)")->delimiter(',');
  fuzz->add_option("--threads", fp.threads, "Worker threads")->check(CLI::Range(1, 256));
  fuzz->add_flag("--inject-fault", fp.inject_fault, "Perturb the drift multiplier before verifying it");
  common(fuzz);

  auto* mrp = app.add_subcommand("check-mrp", "Representation property of the basis");
  std::string basis;
  mrp->add_option("scenario", path, "Scenario JSON")->required();
  mrp->add_option("--basis", basis, "Basis process name");
  common(mrp);

  auto* via = app.add_subcommand("viability", "Deflator and multiplier audit of an enlargement");
  std::string enlargement;
  via->add_option("scenario", path, "Scenario JSON")->required();
  via->add_option("--enlargement", enlargement, "Enlargement name");
  common(via);

  std::string check_name;
  auto* explain = app.add_subcommand("explain", "Describe a check");
  explain->add_option("check", check_name, "Check name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }

  try {
    if (*explain) {
      std::cout << flab::explain(check_name);
      return kPass;
    }
    if (*run) {
      flab::Scenario s = load(path, seed);
      if (inject_fault) s.inject_fault = true;
      flab::json report = flab::run_scenario(s, checks);
      emit(report, o, flab::render_table(report));
      return flab::exit_code(report) == 0 ? kPass : kCheckFail;
    }
    if (*mrp) {
      flab::Scenario s = load(path, seed);
      if (!basis.empty()) s.basis = basis;
      flab::json report = flab::check_mrp_report(s);
      emit(report, o, mrp_table(report));
      return flab::exit_code(report) == 0 ? kPass : kCheckFail;
    }
    if (*via) {
      flab::Scenario s = load(path, seed);
      if (!enlargement.empty()) {
        if (!s.enlargements.count(enlargement))
          throw flab::Error(flab::ErrorKind::ParseError, "unknown enlargement '" + enlargement + "'");
        s.enlargement = enlargement;
      }
      flab::json report = flab::viability_audit(s);
      emit(report, o, flab::render_table(report));
      return flab::exit_code(report) == 0 ? kPass : kCheckFail;
    }
    if (*fuzz) {
      if (seed) fp.first_seed = *seed;
      flab::json report = flab::fuzz(fp);
      std::ostringstream table;
      for (const auto& row : report["instances"])
        table << "seed " << row["seed"] << "  " << row["verdict"].get<std::string>() << "\n";
      table << "passed " << report["summary"]["passed"] << " of " << report["summary"]["instances"] << "\n";
      for (const auto& f : report["failures"]) table << "failure at seed " << f["seed"] << "\n";
      table << "verdict " << report["verdict"].get<std::string>() << "\n";
      std::cout << (o.format == "json" ? report.dump(2) + "\n" : table.str());
      if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        write_file(o.out + "/report.json", report.dump(2) + "\n");
        for (const auto& f : report["failures"])
          if (f.contains("reproducer"))
            write_file(o.out + "/repro_seed" + std::to_string(f["seed"].get<std::uint64_t>()) + ".json",
                       f["reproducer"].dump(2) + "\n");
      }
      return flab::exit_code(report) == 0 ? kPass : kCheckFail;
    }
  } catch (const flab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
