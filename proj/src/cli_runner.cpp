#include "efx/cli_runner.hpp"

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "efx/charity.hpp"
#include "efx/core.hpp"
#include "efx/errors.hpp"
#include "efx/few_types.hpp"
#include "efx/oracle.hpp"
#include "efx/trace.hpp"

namespace efx {

namespace {

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  size_t pos = 0;
  while (pos <= csv.size()) {
    size_t comma = csv.find(',', pos);
    std::string item =
        csv.substr(pos, comma == std::string::npos ? csv.size() - pos : comma - pos);
    if (item.empty()) throw input_error("empty entry in --sizes");
    sizes.push_back(std::stoi(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return sizes;
}

int cmd_gen(const std::string& sizes_csv, int types, int goods, long max_value,
            unsigned long long seed, const std::string& out) {
  std::vector<int> sizes = parse_sizes(sizes_csv);
  if (types != static_cast<int>(sizes.size()))
    throw input_error("--types must equal the number of --sizes entries");
  Instance inst = gen_random_instance(types, sizes, goods, max_value, seed);
  inst.save(out);
  return 0;
}

int cmd_solve(const std::string& algo, const std::string& alpha_str,
              const std::string& eps_str, int d, bool strict,
              const std::string& input, const std::string& out,
              const std::string& cert_path, const std::string& trace_path) {
  Instance inst = Instance::load(input);
  Trace trace;
  Trace* trace_ptr = trace_path.empty() ? nullptr : &trace;

  nlohmann::ordered_json result;
  bool pass = false;
  Allocation allocation;

  if (algo == "fewtypes") {
    Rational alpha =
        alpha_str.empty() ? Rational(2, 3) : parse_rational(alpha_str);
    if (alpha != Rational(2, 3))
      throw input_error("the fewtypes solver guarantees alpha = 2/3 only");
    FewTypesResult r = few_types_allocate(inst, trace_ptr);
    pass = r.certificate.pass;
    allocation = std::move(r.allocation);
    result["allocation"] = allocation.to_json();
    result["alpha"] = "2/3";
    result["certificate"] = r.certificate.to_json();
    result["case"] = critical_case_name(r.fired_case);
    result["trace_file"] = trace_path;
  } else if (algo == "charity") {
    if (eps_str.empty()) throw input_error("charity solver needs --epsilon p/q");
    Rational eps = parse_rational(eps_str);
    std::optional<int> d_opt;
    if (d > 0) d_opt = d;
    CharityResult r = charity_allocate(inst, eps, d_opt, trace_ptr, strict);
    pass = r.report.certificate_pass && r.report.no_heavy_pool_envy &&
           r.report.bound_satisfied;
    result = r.report.to_json(inst, r.allocation);
    allocation = std::move(r.allocation);
    result["allocation"] = allocation.to_json();
    result["trace_file"] = trace_path;
  } else {
    throw input_error("unknown --algo (use fewtypes or charity)");
  }

  if (!out.empty()) write_json(out, allocation.to_json());
  if (!cert_path.empty()) write_json(cert_path, result);
  if (trace_ptr) trace.save_jsonl(trace_path);
  std::cout << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_verify(const std::string& alpha_str, bool charity,
               const std::string& eps_str, const std::string& instance_path,
               const std::string& allocation_path, const std::string& out) {
  Instance inst = Instance::load(instance_path);
  Allocation x = Allocation::load(allocation_path);
  if (!x.is_partition(inst)) throw input_error("not an allocation");

  Rational alpha = parse_rational(alpha_str);
  EfxCertificate efx = check_alpha_efx(inst, x, alpha);
  nlohmann::ordered_json j;
  j["efx"] = efx.to_json();
  bool pass = efx.pass;
  if (charity) {
    std::optional<Rational> eps;
    if (!eps_str.empty()) eps = parse_rational(eps_str);
    CharityCertificate cc = check_charity(inst, x, alpha, eps);
    j["charity"] = cc.to_json();
    pass = pass && cc.pass;
  }
  j["pass"] = pass;
  if (!out.empty()) write_json(out, j);
  std::cout << j.dump(2) << "\n";
  return pass ? 0 : 1;
}

int cmd_oracle(const std::string& alpha_str, bool complete,
               const std::string& input, int jobs, const std::string& out) {
  Instance inst = Instance::load(input);
  Rational alpha = parse_rational(alpha_str);
  OracleResult r = brute_force_exists_alpha_efx(inst, alpha, complete, jobs);
  nlohmann::ordered_json j;
  j["found"] = r.found.has_value();
  j["examined"] = r.examined;
  if (r.found) {
    j["first_index"] = r.first_index;
    j["allocation"] = r.found->to_json();
  }
  if (!out.empty()) write_json(out, j);
  std::cout << j.dump(2) << "\n";
  return r.found ? 0 : 1;
}

int cmd_replay(const std::string& trace_path, const std::string& instance_path) {
  Instance inst = Instance::load(instance_path);
  Trace trace = Trace::load_jsonl(trace_path);
  TraceVerifyReport report = verify_trace(trace, inst);
  nlohmann::ordered_json j;
  j["pass"] = report.pass;
  j["mismatch_index"] = report.mismatch_index;
  j["detail"] = report.detail;
  std::cout << j.dump(2) << "\n";
  return report.pass ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"exact-arithmetic EFX allocation toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random instance");
  int types = 1, goods = 1;
  long max_value = 20;
  unsigned long long seed = 0;
  std::string sizes_csv, out_path;
  gen->add_option("--types", types, "number of agent types")->required();
  gen->add_option("--sizes", sizes_csv, "group sizes, comma separated")->required();
  gen->add_option("--goods", goods, "number of goods")->required();
  gen->add_option("--max-value", max_value, "max integer value (default 20)");
  gen->add_option("--seed", seed, "RNG seed")->required();
  gen->add_option("--out", out_path, "output instance file")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "run a solver on an instance");
  std::string algo, alpha_str, eps_str, input_path, cert_path, trace_path;
  int d = 0;
  bool strict = false;
  solve->add_option("--algo", algo, "fewtypes | charity")->required();
  solve->add_option("--alpha", alpha_str, "target EFX factor p/q (fewtypes)");
  solve->add_option("--epsilon", eps_str, "epsilon p/q (charity)");
  solve->add_option("--d", d, "part-size parameter (charity; default chosen)");
  solve->add_flag("--strict", strict, "also peel plain pool envy (charity)");
  solve->add_option("--input", input_path, "instance file")->required();
  solve->add_option("--out", out_path, "allocation output file");
  solve->add_option("--cert", cert_path, "result/certificate output file");
  solve->add_option("--trace", trace_path, "trace output file (JSON lines)");

  // verify
  auto* verify = app.add_subcommand("verify", "check an allocation file");
  std::string instance_path, allocation_path;
  bool charity_mode = false;
  verify->add_option("--alpha", alpha_str, "EFX factor p/q")->required();
  verify->add_flag("--charity", charity_mode, "also check the pool");
  verify->add_option("--epsilon", eps_str, "heavy-envy epsilon p/q");
  verify->add_option("--instance", instance_path, "instance file")->required();
  verify->add_option("--allocation", allocation_path, "allocation file")->required();
  verify->add_option("--out", out_path, "certificate output file");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exhaustive allocation search");
  bool complete = false;
  int jobs = 1;
  oracle->add_option("--alpha", alpha_str, "EFX factor p/q")->required();
  oracle->add_flag("--complete", complete, "complete allocations only");
  oracle->add_option("--input", input_path, "instance file")->required();
  oracle->add_option("--jobs", jobs, "worker threads (default 1 = serial)");
  oracle->add_option("--out", out_path, "result output file");

  // replay
  auto* replay = app.add_subcommand("replay", "re-run and compare a trace");
  replay->add_option("--trace", trace_path, "trace file")->required();
  replay->add_option("--instance", instance_path, "instance file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen(sizes_csv, types, goods, max_value, seed, out_path);
    if (solve->parsed())
      return cmd_solve(algo, alpha_str, eps_str, d, strict, input_path,
                       out_path, cert_path, trace_path);
    if (verify->parsed())
      return cmd_verify(alpha_str, charity_mode, eps_str, instance_path,
                        allocation_path, out_path);
    if (oracle->parsed())
      return cmd_oracle(alpha_str, complete, input_path, jobs, out_path);
    if (replay->parsed()) return cmd_replay(trace_path, instance_path);
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const contract_error& e) {
    std::cerr << "internal contract violation: " << e.what() << "\n";
    return 3;
  } catch (const diagnostic_error& e) {
    std::cerr << "internal diagnostic: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace efx
