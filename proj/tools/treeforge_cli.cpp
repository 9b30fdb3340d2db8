#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treeforge/scenario.hpp"

namespace fs = std::filesystem;
using treeforge::io::json;

namespace {

enum class status : int { pass = 0, fail = 1, bad_input = 2 };

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw treeforge::validation_error("cannot open " + path.string());
  return json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw treeforge::error("cannot write " + path.string());
  out << text;
}

// Set specs on the command line: inline JSON, "affine:a,b" or
// "explicit:v0,v1,...".
json set_spec(const std::string& s) {
  if (!s.empty() && s.front() == '{') return json::parse(s);
  auto split = [](const std::string& body) {
    std::vector<std::uint64_t> vals;
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stoull(tok));
    return vals;
  };
  if (s.rfind("affine:", 0) == 0) {
    std::vector<std::uint64_t> ab = split(s.substr(7));
    if (ab.size() != 2)
      throw treeforge::validation_error("expected affine:a,b");
    return json{{"affine", {{"a", ab[0]}, {"b", ab[1]}}}};
  }
  if (s.rfind("explicit:", 0) == 0)
    return json{{"explicit", split(s.substr(9))}};
  throw treeforge::validation_error(
      "set spec must be JSON, affine:a,b or explicit:v0,v1,...");
}

int run_command(const std::vector<std::string>& files, const std::string& out_dir,
                std::size_t jobs, std::uint64_t seed) {
  struct outcome {
    status st = status::pass;
    std::string message;
  };
  std::vector<outcome> results(files.size());
  treeforge::io::run_options opt{1, seed};  // scenarios run serially inside

  treeforge::io::detail::parallel_cells(
      files.size(), jobs, [&](std::size_t i) {
        const fs::path path(files[i]);
        json report_doc;
        std::vector<treeforge::io::artifact> artifacts;
        try {
          json doc = load_json(path);
          treeforge::io::scenario_report rep =
              treeforge::io::run_scenario(doc, opt);
          report_doc = std::move(rep.doc);
          artifacts = std::move(rep.files);
          results[i].st = rep.pass ? status::pass : status::fail;
          if (!rep.pass && report_doc.contains("error"))
            results[i].message = report_doc.at("error").get<std::string>();
        } catch (const std::exception& e) {
          results[i].st = status::bad_input;
          results[i].message = e.what();
          report_doc["schema"] = treeforge::io::report_schema;
          report_doc["tool_version"] = treeforge::io::tool_version;
          report_doc["label"] = path.stem().string();
          report_doc["verdict"] = "error";
          report_doc["error"] = e.what();
        }
        fs::path report_path =
            fs::path(out_dir) / (path.stem().string() + ".report.json");
        write_text(report_path, report_doc.dump(2) + "\n");
        for (const treeforge::io::artifact& a : artifacts)
          write_text(fs::path(out_dir) / a.name, a.content);
      });

  int exit_code = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    switch (results[i].st) {
      case status::pass:
        std::cout << "PASS " << files[i] << "\n";
        break;
      case status::fail:
        std::cout << "FAIL " << files[i]
                  << (results[i].message.empty() ? ""
                                                 : ": " + results[i].message)
                  << "\n";
        exit_code = std::max(exit_code, 1);
        break;
      case status::bad_input:
        std::cout << "ERROR " << files[i] << ": " << results[i].message << "\n";
        exit_code = 2;
        break;
    }
  }
  return exit_code;
}

int sweep_command(const std::string& predicate, const std::string& x_spec,
                  const std::string& y_spec, std::uint64_t lo, std::uint64_t hi,
                  const std::string& out_path, std::size_t jobs) {
  json doc;
  doc["kind"] = "predicate-sweep";
  doc["label"] = "sweep";
  doc["predicate"] = predicate;
  doc["X"] = set_spec(x_spec);
  doc["Y"] = set_spec(y_spec);
  doc["range"] = {{"lo", lo}, {"hi", hi}};
  doc["csv"] = "sweep.csv";

  treeforge::io::run_options opt{jobs, 0};
  treeforge::io::scenario_report rep = treeforge::io::run_scenario(doc, opt);
  if (!rep.pass) {
    std::cerr << "sweep failed: "
              << rep.doc.value("error", std::string("unknown")) << "\n";
    return 1;
  }
  const std::string& csv = rep.files.at(0).content;
  if (out_path.empty())
    std::cout << csv;
  else
    write_text(out_path, csv);
  return 0;
}

int export_dot_command(const std::string& object_file,
                       const std::string& out_path) {
  json doc = load_json(object_file);
  std::string dot;
  if (doc.contains("tree")) {
    const json& ref = doc.at("tree");
    treeforge::lazy_tree T = treeforge::io::tree_from_ref(ref, "tree");
    std::size_t depth =
        treeforge::io::detail::uint_of(
            treeforge::io::detail::field(doc, "depth", "export"), "depth");
    std::uint64_t vb = doc.contains("value_bound")
                           ? treeforge::io::detail::uint_of(
                                 doc.at("value_bound"), "value_bound")
                           : 2;
    std::string caption;
    if (ref.is_object() && ref.contains("thinned")) {
      treeforge::surgery::thin_plan plan = treeforge::io::thin_plan_from_json(
          treeforge::io::detail::field(ref.at("thinned"), "plan", "thinned"));
      caption = treeforge::io::enforced_caption(plan.X, plan.h, plan.enforced);
    }
    dot = treeforge::io::to_dot(truncate(T, depth, vb), caption);
  } else if (doc.contains("intersect")) {
    const json& pair = doc.at("intersect");
    if (!pair.is_array() || pair.size() != 2)
      throw treeforge::validation_error("intersect: expected two tree refs");
    std::size_t depth =
        treeforge::io::detail::uint_of(
            treeforge::io::detail::field(doc, "depth", "export"), "depth");
    treeforge::finite_tree common = intersect(
        truncate(treeforge::io::tree_from_ref(pair[0], "intersect[0]"), depth),
        truncate(treeforge::io::tree_from_ref(pair[1], "intersect[1]"), depth));
    dot = treeforge::io::to_dot(common);
  } else if (doc.contains("condition")) {
    treeforge::qforcing::q_condition c =
        treeforge::io::q_condition_from_json(doc.at("condition"));
    dot = treeforge::io::to_dot(c.F);
  } else {
    throw treeforge::validation_error(
        "export object must contain \"tree\", \"intersect\" or \"condition\"");
  }
  if (out_path.empty())
    std::cout << dot;
  else
    write_text(out_path, dot);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree surgery and finite-condition verification batches"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute scenario files");
  std::vector<std::string> files;
  std::string out_dir = ".";
  std::size_t jobs = treeforge::io::jobs_from_env();
  std::uint64_t seed = 0;
  run->add_option("files", files, "scenario JSON files")->required();
  run->add_option("--out", out_dir, "output directory for reports");
  run->add_option("--jobs", jobs, "parallel scenario workers");
  run->add_option("--seed", seed, "corpus-generation seed (never used by constructions)");

  auto* sweep = app.add_subcommand("sweep", "evaluate a window predicate across a range");
  std::string predicate, x_spec, y_spec, sweep_out;
  std::uint64_t lo = 0, hi = 0;
  sweep->add_option("--predicate", predicate, "dominates | weakly-dominates")
      ->required();
  sweep->add_option("--x", x_spec, "scale set spec")->required();
  sweep->add_option("--y", y_spec, "probed set spec")->required();
  sweep->add_option("--lo", lo, "first index")->required();
  sweep->add_option("--hi", hi, "last index")->required();
  sweep->add_option("--out", sweep_out, "CSV path (stdout when omitted)");
  sweep->add_option("--jobs", jobs, "parallel sweep cells");

  auto* exp = app.add_subcommand("export-dot", "render a tree object as DOT");
  std::string object_file, dot_out;
  exp->add_option("object", object_file, "object JSON file")->required();
  exp->add_option("--out", dot_out, "DOT path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return run_command(files, out_dir, jobs, seed);
    if (sweep->parsed())
      return sweep_command(predicate, x_spec, y_spec, lo, hi, sweep_out, jobs);
    if (exp->parsed()) return export_dot_command(object_file, dot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
