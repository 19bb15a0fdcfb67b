// Command-line front end.  Exit codes: 0 on a passing verdict, 1 on a failing
// verdict, 2 on input or validation problems, 3 when a computation would
// exceed the enumeration budget.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gbundles/commands.hpp"
#include "gbundles/serialize.hpp"

namespace {

gbundles::Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) gbundles::fail(gbundles::ErrKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return gbundles::instance_from_json(gbundles::parse_json_text(buf.str()));
}

int emit_report(const gbundles::Report& rep, const std::string& emit) {
  std::cout << (emit == "json" ? gbundles::render_json(rep) : gbundles::render_text(rep));
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equivariant bundles on graph covers: classification and descent"};
  app.require_subcommand(1);

  std::string input, emit = "text", sector = "all";
  long long budget = gbundles::kDefaultBudget;
  unsigned long long seed = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    auto* opt = cmd->add_option("--input", input, "instance file (JSON)");
    if (needs_input) opt->required();
    cmd->add_option("--emit", emit, "output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--budget", budget, "largest enumeration size attempted");
    cmd->add_option("--seed", seed, "reserved; accepted for interface stability");
  };

  CLI::App* classify = app.add_subcommand("classify", "classify twisted cocycles at branch points");
  add_common(classify, true);
  CLI::App* enumerate = app.add_subcommand("enumerate", "enumerate bundle classes on the cover");
  add_common(enumerate, true);
  enumerate->add_option("--sector", sector, "all, anchor, trivial, or a sector index");
  CLI::App* verify = app.add_subcommand("verify", "check the descent equivalence on an instance");
  add_common(verify, true);
  CLI::App* example = app.add_subcommand("example-s4", "run the built-in S4 worked example");
  add_common(example, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (classify->parsed()) return emit_report(gbundles::cmd_classify(load_instance(input)), emit);
    if (enumerate->parsed())
      return emit_report(
          gbundles::cmd_enumerate(load_instance(input), gbundles::parse_sector(sector), budget),
          emit);
    if (verify->parsed()) return emit_report(gbundles::cmd_verify(load_instance(input), budget), emit);
    return emit_report(gbundles::cmd_example_s4(budget), emit);
  } catch (const gbundles::Error& e) {
    std::cerr << "error [" << gbundles::err_name(e.kind()) << "]: " << e.what() << "\n";
    return e.kind() == gbundles::ErrKind::BudgetExceeded ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
