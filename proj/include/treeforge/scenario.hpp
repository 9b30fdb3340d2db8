#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "treeforge/dot.hpp"
#include "treeforge/json_io.hpp"

namespace treeforge::io {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr const char* scenario_schema = "treeforge.scenario/1";
inline constexpr const char* report_schema = "treeforge.report/1";

struct run_options {
  std::size_t jobs = 1;
  std::uint64_t seed = 0;  // corpus generation only; constructions never see it
};

inline std::size_t jobs_from_env() {
  if (const char* env = std::getenv("TREEFORGE_JOBS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return 1;
}

struct artifact {
  std::string name;
  std::string content;
};

struct scenario_report {
  json doc;
  bool pass = false;
  std::vector<artifact> files;
};

namespace detail {

// Index-addressed work so the merge is position-determined no matter how
// many workers ran. A cell failure is carried back by message and rethrown
// after the join.
template <class Fn>
void parallel_cells(std::size_t count, std::size_t jobs, Fn&& cell) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) cell(i);
    return;
  }
  std::vector<std::string> errors(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::size_t workers = jobs < count ? jobs : count;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1)) {
        try {
          cell(i);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  for (const std::string& e : errors)
    if (!e.empty()) throw error(e);
}

inline json nodes_to_json(const std::vector<node>& ts) {
  json a = json::array();
  for (const node& t : ts) a.push_back(node_to_json(t));
  return a;
}

inline std::vector<std::uint64_t> ramification_levels(const finite_tree& T) {
  std::vector<std::uint64_t> levels;
  for (const node& t : ramification_points(T)) levels.push_back(t.size());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

inline void fail(json& report, const std::string& message) {
  report["verdict"] = "fail";
  report["error"] = message;
}

// ---- kind handlers: parse first (validation errors escape to the
// caller), then execute with failures folded into the verdict ----

inline void run_thin(const json& doc, const run_options&, json& report,
                     std::vector<artifact>& files) {
  std::string flavor =
      field(doc, "flavor", "thin scenario").get<std::string>();
  const json& horizons = field(doc, "horizons", "thin scenario");
  json detail;

  if (flavor == "sacks") {
    lazy_tree base = tree_from_ref(field(doc, "base", "thin scenario"), "base");
    surgery::thin_plan plan =
        thin_plan_from_json(field(doc, "plan", "thin scenario"));
    std::size_t depth = uint_of(field(horizons, "depth", "horizons"), "depth");
    if (depth == 0)
      throw validation_error("horizons: depth must be strictly positive");
    if (!plan.enforced.empty()) {
      baire::interval last = baire::block(plan.X, plan.enforced.back(),
                                          plan.h.at(plan.enforced.back()));
      if (depth < last.hi)
        throw validation_error(
            "horizons: depth stops short of the last enforced sub-block");
    }

    // Verdict = the three soundness clauses of the thinning, scanned over
    // the whole truncation: every kept child exists in the base tree, a
    // level the plan forbids carries no split, and each enforced family
    // splits inside its selected sub-block.
    try {
      lazy_tree thinned = surgery::sacks_thin(base, plan);
      finite_tree cut = truncate(thinned, depth);
      bool contained = true;
      bool single = true;
      json forbidden_splits = json::array();
      for (const node& t : cut.nodes()) {
        if (t.size() >= depth) continue;
        std::vector<std::uint32_t> kept = cut.children_of(t);
        std::vector<std::uint32_t> offered = base.children(t);
        if (!std::includes(offered.begin(), offered.end(), kept.begin(),
                           kept.end()))
          contained = false;
        if (kept.size() >= 2 &&
            !surgery::split_permitted(plan.X, plan.h, t.size())) {
          single = false;
          forbidden_splits.push_back(node_to_json(t));
        }
      }
      bool enforced_hold = true;
      json enforced = json::array();
      for (std::uint64_t i : plan.enforced) {
        baire::interval b = baire::block(plan.X, i, plan.h.at(i));
        bool holds = true;
        std::size_t checked = 0;
        for (const node& t : cut.at_level(b.lo)) {
          ++checked;
          if (!ramifies_below(cut, t, b.hi, ramify_mode::inclusive))
            holds = false;
        }
        enforced_hold = enforced_hold && holds;
        json entry;
        entry["family"] = i;
        entry["holds"] = holds;
        entry["nodes_checked"] = checked;
        enforced.push_back(entry);
      }
      detail["containment"] = contained;
      detail["single_child_where_forbidden"] = single;
      detail["forbidden_splits"] = forbidden_splits;
      detail["enforced"] = enforced;
      detail["ramification_levels"] = ramification_levels(cut);
      detail["leaves_at_depth"] = cut.at_level(depth).size();
      report["verdict"] =
          contained && single && enforced_hold ? "pass" : "fail";
      if (doc.contains("export"))
        files.push_back(
            {field(doc.at("export"), "dot", "export").get<std::string>(),
             to_dot(cut, enforced_caption(plan.X, plan.h, plan.enforced))});
    } catch (const std::exception& e) {
      fail(report, e.what());
    }
  } else if (flavor == "laver" || flavor == "miller") {
    lazy_tree base = tree_from_ref(field(doc, "base", "thin scenario"), "base");
    surgery::value_plan plan =
        value_plan_from_json(field(doc, "plan", "thin scenario"));
    surgery::omega_horizon horizon = omega_horizon_from_json(horizons);

    try {
      if (flavor == "laver") {
        lazy_tree thinned = surgery::laver_thin(base, plan, horizon);
        surgery::laver_report rep = surgery::laver_validate(thinned, horizon);
        detail["stem"] = node_to_json(rep.stem);
        detail["stem_children"] = thinned.children(rep.stem, horizon.value_bound);
        detail["failures"] = nodes_to_json(rep.failures);
        report["verdict"] = rep.holds ? "pass" : "fail";
      } else {
        lazy_tree thinned = surgery::miller_thin(base, plan, horizon);
        surgery::miller_report rep = surgery::miller_validate(thinned, horizon);
        detail["branching"] = nodes_to_json(rep.branching);
        report["verdict"] = rep.holds ? "pass" : "fail";
      }
      if (doc.contains("export")) {
        lazy_tree thinned = flavor == "laver"
                                ? surgery::laver_thin(base, plan, horizon)
                                : surgery::miller_thin(base, plan, horizon);
        files.push_back(
            {field(doc.at("export"), "dot", "export").get<std::string>(),
             to_dot(truncate(thinned, horizon.depth, horizon.value_bound),
                    enforced_caption(plan.X, plan.h, plan.enforced))});
      }
    } catch (const std::exception& e) {
      fail(report, e.what());
    }
  } else if (flavor == "silver") {
    surgery::silver_condition p =
        silver_from_json(field(doc, "condition", "thin scenario"));
    surgery::value_plan plan =
        value_plan_from_json(field(doc, "plan", "thin scenario"));
    std::size_t depth = uint_of(field(horizons, "depth", "horizons"), "depth");
    std::uint64_t scan_cap = horizons.contains("scan_cap")
                                 ? uint_of(horizons.at("scan_cap"), "scan_cap")
                                 : 4096;
    if (depth == 0 || scan_cap == 0)
      throw validation_error("horizons: must be strictly positive");

    try {
      surgery::silver_condition thinned = surgery::silver_thin(p, plan, scan_cap);
      detail["free_values"] = thinned.free.values_in(0, depth);
      report["verdict"] = "pass";
      if (doc.contains("export"))
        files.push_back(
            {field(doc.at("export"), "dot", "export").get<std::string>(),
             to_dot(surgery::silver_to_tree(thinned, depth),
                    enforced_caption(plan.X, plan.h, plan.enforced))});
    } catch (const std::exception& e) {
      fail(report, e.what());
    }
  } else {
    throw validation_error("thin scenario: unknown flavor '" + flavor + "'");
  }
  report["detail"] = detail;
}

inline void run_antichain(const json& doc, const run_options&, json& report,
                          std::vector<artifact>& files) {
  baire::enumerated_set X =
      enumerated_set_from_json(field(doc, "X", "antichain scenario"), "X");
  std::vector<lazy_tree> trees;
  for (const json& r : field(doc, "inputs", "antichain scenario"))
    trees.push_back(tree_from_ref(r, "inputs"));
  if (trees.size() < 2)
    throw validation_error("antichain scenario: need at least two inputs");
  std::uint64_t i_max =
      uint_of(field(doc, "i_max", "antichain scenario"), "i_max");
  std::size_t depth = uint_of(field(doc, "depth", "antichain scenario"), "depth");
  if (depth == 0)
    throw validation_error("antichain scenario: depth must be strictly positive");

  json detail;
  try {
    surgery::antichain_result res = surgery::antichain_build(X, trees, i_max, depth);
    json plans = json::array();
    for (const surgery::thin_plan& p : res.plans) {
      json entry;
      entry["enforced"] = p.enforced;
      entry["h"] = p.h.name();
      plans.push_back(entry);
    }
    detail["plans"] = plans;
    json certs = json::array();
    for (const auto& pc : res.certificates) {
      json entry;
      entry["a"] = pc.a;
      entry["b"] = pc.b;
      entry["certificate"] = certificate_to_json(pc.cert);
      certs.push_back(entry);
    }
    detail["certificates"] = certs;
    report["verdict"] = res.all_passed() ? "pass" : "fail";

    if (doc.contains("export")) {
      const json& ex = doc.at("export");
      std::size_t a = uint_of(field(ex, "pair", "export").at(0), "export");
      std::size_t b = uint_of(field(ex, "pair", "export").at(1), "export");
      std::size_t d = uint_of(field(ex, "depth", "export"), "export");
      if (a >= res.conditions.size() || b >= res.conditions.size())
        throw validation_error("export: pair index out of range");
      finite_tree common = intersect(truncate(res.conditions[a], d),
                                     truncate(res.conditions[b], d));
      files.push_back({field(ex, "dot", "export").get<std::string>(),
                       to_dot(common, "intersection " + std::to_string(a) +
                                          "&" + std::to_string(b))});
    }
  } catch (const std::exception& e) {
    fail(report, e.what());
  }
  report["detail"] = detail;
}

inline void run_qrun(const json& doc, const run_options&, json& report,
                     std::vector<artifact>& files) {
  const json& seed_spec = field(doc, "seed", "qrun scenario");
  qforcing::q_condition seed =
      seed_spec.is_object() && seed_spec.contains("root")
          ? qforcing::q_root(tree_from_ref(seed_spec.at("root"), "seed.root"))
          : q_condition_from_json(seed_spec, "seed");
  qforcing::forbidden_list fb =
      forbidden_from_json(field(doc, "forbidden", "qrun scenario"));
  std::vector<qforcing::q_task> schedule =
      schedule_from_json(field(doc, "schedule", "qrun scenario"));
  std::size_t horizon = doc.contains("horizon")
                            ? uint_of(doc.at("horizon"), "horizon")
                            : 64;
  if (horizon == 0)
    throw validation_error("qrun scenario: horizon must be strictly positive");

  json detail;
  try {
    qforcing::q_run_result run = qforcing::q_generic_run(seed, fb, schedule, horizon);
    bool all_valid = true;
    json trace = json::array();
    for (const qforcing::q_trace_entry& step : run.trace) {
      qforcing::q_verdict v = qforcing::q_validate(step.after, fb);
      all_valid = all_valid && v.ok;
      json entry;
      entry["task"] = step.label;
      entry["condition"] = q_condition_to_json(step.after);
      entry["valid"] = v.ok;
      json certs = json::array();
      for (const auto& c : v.certificates) certs.push_back(certificate_to_json(c));
      entry["certificates"] = certs;
      trace.push_back(entry);
    }
    detail["trace"] = trace;
    detail["final"] = q_condition_to_json(run.last);
    json avoids = json::array();
    bool clean = true;
    for (const auto& c : run.avoid_checks) {
      json entry;
      entry["forbidden_index"] = c.forbidden_index;
      entry["height"] = c.height;
      entry["clean"] = c.clean;
      avoids.push_back(entry);
      clean = clean && c.clean;
    }
    detail["avoid_checks"] = avoids;
    if (!run.ok) detail["abort"] = run.error;
    report["verdict"] = run.ok && all_valid && clean ? "pass" : "fail";
    if (!run.ok) report["error"] = run.error;

    if (doc.contains("export"))
      files.push_back(
          {field(doc.at("export"), "dot", "export").get<std::string>(),
           to_dot(run.last.F)});
  } catch (const std::exception& e) {
    fail(report, e.what());
  }
  report["detail"] = detail;
}

inline void run_name(const json& doc, const run_options&, json& report) {
  namecraft::finite_poset P =
      poset_from_json(field(doc, "poset", "name scenario"));
  std::vector<std::vector<std::string>> antichains;
  for (const json& a : field(doc, "antichains", "name scenario")) {
    std::vector<std::string> A;
    for (const json& e : a) A.push_back(e.get<std::string>());
    antichains.push_back(std::move(A));
  }
  std::vector<std::string> targets;
  for (const json& t : field(doc, "targets", "name scenario"))
    targets.push_back(t.get<std::string>());
  std::size_t threshold =
      uint_of(field(doc, "threshold", "name scenario"), "threshold");
  std::size_t idx = doc.contains("phi_antichain")
                        ? uint_of(doc.at("phi_antichain"), "phi_antichain")
                        : 0;
  if (idx >= antichains.size())
    throw validation_error("name scenario: phi_antichain out of range");

  json detail;
  try {
    namecraft::star_result star =
        namecraft::verify_star(P, antichains, targets, threshold);
    json witness;
    for (const auto& [p, z] : star.witness) witness[p] = z;
    detail["witness"] = witness;
    detail["unwitnessed"] = star.unwitnessed;
    detail["fully_witnessed"] = star.fully_witnessed();

    std::map<std::string, std::string> phi =
        namecraft::build_phi(P, antichains[idx], targets, threshold);
    json phij;
    for (const auto& [q, v] : phi) phij[q] = v;
    detail["phi"] = phij;
    bool ok = namecraft::check_phi(P, antichains[idx], phi, targets, threshold);
    detail["checked"] = ok;
    report["verdict"] = ok ? "pass" : "fail";
  } catch (const std::exception& e) {
    fail(report, e.what());
  }
  report["detail"] = detail;
}

inline void run_sweep(const json& doc, const run_options& opt, json& report,
                      std::vector<artifact>& files) {
  std::string predicate =
      field(doc, "predicate", "sweep scenario").get<std::string>();
  if (predicate != "dominates" && predicate != "weakly-dominates")
    throw validation_error("sweep scenario: predicate must be "
                           "\"dominates\" or \"weakly-dominates\"");
  baire::enumerated_set X =
      enumerated_set_from_json(field(doc, "X", "sweep scenario"), "X");
  baire::enumerated_set Y =
      enumerated_set_from_json(field(doc, "Y", "sweep scenario"), "Y");
  const json& range = field(doc, "range", "sweep scenario");
  std::uint64_t lo = uint_of(field(range, "lo", "range"), "range");
  std::uint64_t hi = uint_of(field(range, "hi", "range"), "range");
  if (hi < lo)
    throw validation_error("sweep scenario: range is empty");

  json detail;
  try {
    std::size_t count = static_cast<std::size_t>(hi - lo + 1);
    std::vector<bool> verdicts(count);
    std::vector<std::uint64_t> counts(count);
    parallel_cells(count, opt.jobs, [&](std::size_t k) {
      std::uint64_t i = lo + k;
      if (predicate == "dominates") {
        baire::interval w{X.mu(i), X.mu(i + 1)};
        counts[k] = Y.count_in(w.lo, w.hi);
        verdicts[k] = counts[k] >= 2;
      } else {
        // The binding quantity: the thinnest sub-block of the family.
        std::uint64_t least = ~std::uint64_t(0);
        for (std::uint64_t j = 0; j < baire::pow2(i); ++j) {
          baire::interval b = baire::block(X, i, j);
          std::uint64_t c = Y.count_in(b.lo, b.hi);
          if (c < least) least = c;
        }
        counts[k] = least;
        verdicts[k] = least >= 2;
      }
    });

    std::string csv = "index,verdict,count\n";
    json rows = json::array();
    for (std::size_t k = 0; k < count; ++k) {
      json row;
      row["index"] = lo + k;
      row["verdict"] = static_cast<bool>(verdicts[k]);
      row["count"] = counts[k];
      rows.push_back(row);
      csv += std::to_string(lo + k);
      csv += verdicts[k] ? ",true," : ",false,";
      csv += std::to_string(counts[k]);
      csv += "\n";
    }
    detail["rows"] = rows;
    report["verdict"] = "pass";
    std::string csv_name = doc.contains("csv")
                               ? doc.at("csv").get<std::string>()
                               : "sweep.csv";
    files.push_back({csv_name, csv});
  } catch (const std::exception& e) {
    fail(report, e.what());
  }
  report["detail"] = detail;
}

}  // namespace detail

// Execute one scenario document. Malformed documents throw (the caller
// reports them as input errors); everything past parsing lands in the
// verdict. The report carries the scenario text and its digest so any
// certificate inside can be re-derived from the report alone.
inline scenario_report run_scenario(const json& doc, const run_options& opt) {
  if (!doc.is_object())
    throw validation_error("scenario: expected a JSON object");
  if (doc.contains("schema") &&
      doc.at("schema").get<std::string>() != scenario_schema)
    throw validation_error("scenario: unsupported schema");
  std::string kind = detail::field(doc, "kind", "scenario").get<std::string>();
  std::string label = doc.value("label", "");

  scenario_report out;
  out.doc["schema"] = report_schema;
  out.doc["tool_version"] = tool_version;
  out.doc["kind"] = kind;
  out.doc["label"] = label;
  out.doc["scenario_digest"] = fnv1a64_hex(doc.dump());
  out.doc["scenario"] = doc;

  auto start = std::chrono::steady_clock::now();
  if (kind == "thin")
    detail::run_thin(doc, opt, out.doc, out.files);
  else if (kind == "antichain")
    detail::run_antichain(doc, opt, out.doc, out.files);
  else if (kind == "qrun")
    detail::run_qrun(doc, opt, out.doc, out.files);
  else if (kind == "name")
    detail::run_name(doc, opt, out.doc);
  else if (kind == "predicate-sweep")
    detail::run_sweep(doc, opt, out.doc, out.files);
  else
    throw validation_error("scenario: unknown kind '" + kind + "'");
  auto elapsed = std::chrono::steady_clock::now() - start;

  out.doc["timings"]["total_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
  out.pass = out.doc.at("verdict") == "pass";
  return out;
}

}  // namespace treeforge::io
