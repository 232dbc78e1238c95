// ewirec: check, run, denote, normalize and compare EWire programs.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ewire/driver.hpp"
#include "ewire/parser.hpp"
#include "ewire/serialize.hpp"

namespace {

using namespace ewire;

struct Config {
  std::string mode = "cpu";
  std::int64_t fuel = 10000;
  std::int64_t shots = 0;
  std::uint64_t seed = 0;
  int qlist_size = -1;
  double tol = 1e-9;
  bool json = false;
  bool trace = false;
  bool copower_rules = false;
  std::string file;
  std::vector<std::string> entries;
};

constexpr int kUsage = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

EvalOptions eval_options(const Config& c) {
  EvalOptions o;
  o.mode = c.mode == "cpsu" ? Mode::CPSU : Mode::CPU;
  o.fuel = c.fuel;
  return o;
}

std::optional<int> qlist_size(const Config& c) {
  if (c.qlist_size < 0) return std::nullopt;
  return c.qlist_size;
}

std::optional<std::string> entry_arg(const Config& c, size_t i) {
  if (i < c.entries.size()) return c.entries[i];
  return std::nullopt;
}

void print_superop(const SuperOp& f, const Config& c) {
  if (c.json) {
    std::cout << superop_to_json(f, c.tol).dump() << "\n";
    return;
  }
  auto blocks = [](const FdAlgebra& a) {
    std::string s = "[";
    for (size_t i = 0; i < a.blocks().size(); ++i) s += (i ? ", " : "") + std::to_string(a.blocks()[i]);
    return s + "]";
  };
  std::cout << "source_blocks: " << blocks(f.source) << "\n"
            << "target_blocks: " << blocks(f.target) << "\n"
            << "cp: " << (is_cp(f, c.tol) ? "true" : "false") << "\n"
            << "unital: " << (is_unital(f, c.tol) ? "true" : "false") << "\n"
            << "subunital: " << (is_subunital(f, c.tol) ? "true" : "false") << "\n"
            << "matrix (" << f.matrix.rows() << " x " << f.matrix.cols() << "):\n";
  for (Eigen::Index r = 0; r < f.matrix.rows(); ++r) {
    for (Eigen::Index k = 0; k < f.matrix.cols(); ++k) {
      const Complex z = f.matrix(r, k);
      std::cout << (k ? " " : "") << format_number(z.real());
      if (round12(z.imag()) != 0.0) std::cout << (z.imag() < 0 ? "-" : "+") << format_number(std::abs(z.imag())) << "i";
    }
    std::cout << "\n";
  }
}

int cmd_check(const Config& c) {
  Program p = parse_program(read_file(c.file));
  Typechecker tc(p);
  if (c.json) {
    Json decls = Json::array();
    for (const auto& [name, type] : tc.declaration_types())
      decls.push_back(Json{{"name", name}, {"type", pretty_print(type)}});
    std::cout << Json{{"ok", true}, {"declarations", decls}}.dump() << "\n";
  } else {
    for (const auto& [name, type] : tc.declaration_types()) std::cout << name << " : " << pretty_print(type) << "\n";
  }
  return 0;
}

int cmd_run(const Config& c) {
  Program p = parse_program(read_file(c.file));
  Typechecker tc(p);
  const std::string entry = resolve_entry(tc.elaborated(), entry_arg(c, 0));
  Distribution d = run_entry(tc, entry, eval_options(c));
  std::vector<std::pair<std::string, std::int64_t>> counts;
  if (c.shots > 0) counts = sample(d, c.seed, c.shots);
  if (c.json) {
    std::cout << distribution_to_json(d, c.shots > 0 ? &counts : nullptr).dump() << "\n";
    return 0;
  }
  for (const auto& [v, w] : d.outcomes) std::cout << format_value(v) << ": " << format_number(w) << "\n";
  if (c.mode == "cpsu" || d.diverge_mass() > 1e-12) std::cout << "diverge: " << format_number(d.diverge_mass()) << "\n";
  if (c.shots > 0) {
    std::cout << "counts:";
    for (const auto& [k, n] : counts) std::cout << " " << k << "=" << n;
    std::cout << "\n";
  }
  return 0;
}

int cmd_denote(const Config& c) {
  Program p = parse_program(read_file(c.file));
  Typechecker tc(p);
  const std::string entry = resolve_entry(tc.elaborated(), entry_arg(c, 0));
  SuperOp f = denote_entry(tc, entry, eval_options(c), qlist_size(c));
  print_superop(f, c);
  return 0;
}

int cmd_normalize(const Config& c) {
  Program p = parse_program(read_file(c.file));
  Typechecker tc(p);
  const std::string entry = resolve_entry(tc.elaborated(), entry_arg(c, 0));
  NormalizeOptions o;
  o.copower_rules = c.copower_rules;
  EntryNormalization n = normalize_entry(tc, entry, o);
  if (c.json) {
    Json j;
    j["entry"] = entry;
    j["term"] = n.text;
    j["steps"] = n.trace.size();
    j["step_limit"] = n.step_limit;
    if (c.trace) {
      Json t = Json::array();
      for (const auto& e : n.trace) t.push_back(trace_entry_to_json(e));
      j["trace"] = std::move(t);
    }
    std::cout << j.dump() << "\n";
  } else {
    if (c.trace)
      for (const auto& e : n.trace) std::cout << trace_entry_to_json(e).dump() << "\n";
    std::cout << n.text << "\n";
  }
  if (n.step_limit) {
    std::cerr << "error: StepLimit: normalization stopped after " << n.trace.size() << " steps\n";
    return 2;
  }
  return 0;
}

int cmd_equiv(const Config& c) {
  if (c.entries.size() != 2) {
    std::cerr << "equiv needs FILE E1 E2\n";
    return kUsage;
  }
  Program p = parse_program(read_file(c.file));
  Typechecker tc(p);
  WireType o1, o2;
  SuperOp f = denote_entry(tc, c.entries[0], eval_options(c), qlist_size(c), &o1);
  SuperOp g = denote_entry(tc, c.entries[1], eval_options(c), qlist_size(c), &o2);
  const bool same_type = o1 == o2 && f.source == g.source && f.target == g.target;
  const double dist = same_type ? frobenius_distance(f, g) : std::numeric_limits<double>::infinity();
  const bool equal = same_type && dist <= c.tol;
  if (c.json) {
    Json j;
    j["equivalent"] = equal;
    j["distance"] = same_type ? Json(round12(dist)) : Json(nullptr);
    std::cout << j.dump() << "\n";
  } else if (!same_type) {
    std::cout << "not equivalent (different types)\n";
  } else {
    std::cout << (equal ? "equivalent" : "not equivalent") << " (distance " << format_number(dist) << ")\n";
  }
  return equal ? 0 : 1;
}

int report(const std::exception& e, const Config& c, int code) {
  if (c.json) {
    std::cout << error_to_json(e).dump() << "\n";
  } else {
    std::string where;
    if (auto* t = dynamic_cast<const TypeError*>(&e)) where = " at " + to_string(t->span);
    if (auto* p = dynamic_cast<const ParseError*>(&e)) where = " at " + to_string(p->span);
    std::string msg = e.what();
    if (auto* t = dynamic_cast<const TypeError*>(&e)) msg = t->message;
    if (auto* p = dynamic_cast<const ParseError*>(&e)) msg = p->message;
    std::cerr << "error: " << error_kind(e) << where << ": " << msg << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EWire compiler and simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  app.add_option("--mode", cfg.mode, "Semantic model: cpu (total) or cpsu (with divergence)")
      ->check(CLI::IsMember({"cpu", "cpsu"}));
  app.add_option("--fuel", cfg.fuel, "Fixpoint unfoldings per evaluation")->check(CLI::NonNegativeNumber);
  app.add_option("--shots", cfg.shots, "Sample this many outcomes (run only)")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Sampler seed");
  app.add_option("--qlist-size", cfg.qlist_size, "Length that instantiates qlist inputs")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tol", cfg.tol, "Numerical tolerance")->check(CLI::NonNegativeNumber);
  app.add_flag("--json", cfg.json, "Machine-readable output");
  app.add_flag("--trace", cfg.trace, "Print the rewrite trace (normalize)");
  app.add_flag("--copower-rules", cfg.copower_rules, "Enable the lift/init rewrite rules");

  std::map<std::string, std::function<int(const Config&)>> commands = {
      {"check", cmd_check}, {"run", cmd_run}, {"denote", cmd_denote}, {"normalize", cmd_normalize},
      {"equiv", cmd_equiv}};
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> help = {
      {"check", "Typecheck a program and print declaration types"},
      {"run", "Exact output distribution of an entry"},
      {"denote", "Heisenberg superoperator of a circuit entry"},
      {"normalize", "Rewrite an entry to normal form"},
      {"equiv", "Compare the denotations of two entries"}};
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("file", cfg.file, "Source file")->required()->check(CLI::ExistingFile);
    sub->add_option("entries", cfg.entries, name == "equiv" ? "Two entries" : "Entry declaration");
    subs[name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;
  if (cfg.shots > 0 && command != "run") {
    std::cerr << "--shots only applies to run\n";
    return kUsage;
  }
  if (command != "equiv" && cfg.entries.size() > 1) {
    std::cerr << command << " takes at most one entry\n";
    return kUsage;
  }
  try {
    return commands.at(command)(cfg);
  } catch (const ResourceError& e) {
    return report(e, cfg, 2);
  } catch (const Error& e) {
    return report(e, cfg, 1);
  } catch (const std::exception& e) {
    return report(e, cfg, 1);
  }
}
