#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "symdyn/error.hpp"
#include "symdyn/report.hpp"

namespace {

int exit_code_for(symdyn::ErrorKind kind) {
  using symdyn::ErrorKind;
  switch (kind) {
    case ErrorKind::NoConvergence:
    case ErrorKind::PartitionInvalid:
    case ErrorKind::NotIrreducible:
    case ErrorKind::SegmentMismatch:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermodynamic formalism on topological Markov shifts"};
  app.require_subcommand(1);

  symdyn::CommandOptions opts;
  std::string potential_path, anchor = "lex", out_path;

  auto add_common = [&](CLI::App* sub, bool needs_spec) {
    if (needs_spec) {
      sub->add_option("--spec", opts.spec_path, "shift spec JSON")->required();
      sub->add_option("--potential", potential_path, "potential JSON (zero when omitted)");
      sub->add_option("--anchor", anchor, "anchor policy: lex or explicit:PATH");
      sub->add_option("--stem", opts.stem, "past stem word");
    }
    sub->add_option("--depth", opts.depth, "cylinder depth")->check(CLI::Range(1, 64));
    sub->add_option("--nmax", opts.nmax, "longest periodic orbit")->check(CLI::Range(1, 200));
    sub->add_option("--threads", opts.threads, "worker threads")->check(CLI::Range(1, 256));
    sub->add_option("--out", out_path, "report path (stdout when omitted)");
  };

  for (const char* name : {"pressure", "classify", "reduce", "spectral", "leaf", "equilibrium", "ledrappier", "verify"})
    add_common(app.add_subcommand(name, std::string("run ") + name), true);
  auto* demo = app.add_subcommand("catmap-demo", "cat map pipeline");
  add_common(demo, false);
  demo->add_option("--t", opts.t, "potential -t log lambda, t in [0,2]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  opts.command = app.get_subcommands().front()->get_name();
  if (!potential_path.empty()) opts.potential_path = potential_path;
  if (anchor.rfind("explicit:", 0) == 0) {
    opts.anchor_policy = "explicit";
    opts.anchors_path = anchor.substr(9);
  } else {
    opts.anchor_policy = anchor;
  }

  symdyn::RunReport report;
  try {
    report = symdyn::run_command(opts);
  } catch (const symdyn::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string text = report.to_json().dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << out_path << ":1: cannot write report\n";
      return 2;
    }
    out << text;
  }
  if (!report.all_finite()) {
    std::cerr << "non-finite value in report\n";
    return 1;
  }
  if (!report.passed()) {
    for (const auto& c : report.checks)
      if (c.status == "fail") std::cerr << "check failed: " << c.name << " residual " << c.residual << " bound " << c.bound << "\n";
    return 1;
  }
  return 0;
}
