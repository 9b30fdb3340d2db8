#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "treeforge/baire.hpp"
#include "treeforge/core.hpp"
#include "treeforge/finite_tree.hpp"
#include "treeforge/laver.hpp"
#include "treeforge/lazy_tree.hpp"
#include "treeforge/namecraft.hpp"
#include "treeforge/node.hpp"
#include "treeforge/qforcing.hpp"
#include "treeforge/silver.hpp"
#include "treeforge/surgery.hpp"

namespace treeforge::io {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key,
                         const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw validation_error(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline std::uint64_t uint_of(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw validation_error(where + ": expected a non-negative integer");
}

inline std::vector<std::uint64_t> uints_of(const json& j,
                                           const std::string& where) {
  if (!j.is_array()) throw validation_error(where + ": expected an array");
  std::vector<std::uint64_t> out;
  for (const json& v : j) out.push_back(uint_of(v, where));
  return out;
}

}  // namespace detail

// ---- nodes and finite trees ----

inline json node_to_json(const node& t) {
  json a = json::array();
  for (std::uint32_t v : t.entries()) a.push_back(v);
  return a;
}

inline node node_from_json(const json& j, const std::string& where = "node") {
  if (!j.is_array()) throw validation_error(where + ": expected an array");
  std::vector<std::uint32_t> entries;
  for (const json& v : j)
    entries.push_back(
        static_cast<std::uint32_t>(detail::uint_of(v, where)));
  return node(std::move(entries));
}

inline json finite_tree_to_json(const finite_tree& T) {
  json j;
  j["width"] = T.width() == width_t::binary ? json(2) : json("omega");
  json nodes = json::array();
  for (const node& t : T.nodes()) nodes.push_back(node_to_json(t));
  j["nodes"] = nodes;
  return j;
}

inline finite_tree finite_tree_from_json(const json& j,
                                         const std::string& where = "tree") {
  const json& w = detail::field(j, "width", where);
  width_t width;
  if (w.is_number_integer() && w.get<std::int64_t>() == 2)
    width = width_t::binary;
  else if (w.is_string() && w.get<std::string>() == "omega")
    width = width_t::omega;
  else
    throw validation_error(where + ": width must be 2 or \"omega\"");
  std::vector<node> nodes;
  for (const json& n : detail::field(j, "nodes", where))
    nodes.push_back(node_from_json(n, where));
  return finite_tree::from_nodes(width, std::move(nodes));
}

// ---- enumerated sets, growth functions, colorings ----

inline baire::enumerated_set enumerated_set_from_json(
    const json& j, const std::string& where = "set") {
  if (j.is_object() && j.contains("explicit"))
    return baire::enumerated_set::explicit_prefix(
        detail::uints_of(j.at("explicit"), where));
  if (j.is_object() && j.contains("affine")) {
    const json& a = j.at("affine");
    std::uint64_t slope = detail::uint_of(detail::field(a, "a", where), where);
    std::uint64_t base = detail::uint_of(detail::field(a, "b", where), where);
    if (slope < 1)
      throw validation_error(where + ": affine slope must be at least 1");
    return baire::enumerated_set::affine(slope, base);
  }
  throw validation_error(where + ": expected {\"explicit\": [...]} or "
                         "{\"affine\": {\"a\":..,\"b\":..}}");
}

inline baire::growth_function growth_function_from_json(
    const json& j, const std::string& where = "growth") {
  if (j.is_object() && j.contains("explicit"))
    return baire::growth_function::explicit_prefix(
        detail::uints_of(j.at("explicit"), where));
  if (j.is_object() && j.contains("affine")) {
    const json& a = j.at("affine");
    std::uint64_t slope = detail::uint_of(detail::field(a, "a", where), where);
    std::uint64_t base = detail::uint_of(detail::field(a, "b", where), where);
    return baire::growth_function::affine(slope, base);
  }
  throw validation_error(where + ": expected {\"explicit\": [...]} or "
                         "{\"affine\": {\"a\":..,\"b\":..}}");
}

inline surgery::coloring coloring_from_json(const json& j,
                                            const std::string& where = "h") {
  if (j.is_object() && j.contains("modular"))
    return surgery::coloring::modular(
        detail::uint_of(j.at("modular"), where));
  if (j.is_object() && j.contains("explicit"))
    return surgery::coloring::explicit_prefix(
        detail::uints_of(j.at("explicit"), where));
  throw validation_error(where + ": expected {\"modular\": a} or "
                         "{\"explicit\": [...]}");
}

// ---- thinning plans ----

inline surgery::thin_plan thin_plan_from_json(const json& j,
                                              const std::string& where = "plan") {
  surgery::low_policy low = surgery::low_policy::keep;
  if (j.contains("low_policy")) {
    std::string p = j.at("low_policy").get<std::string>();
    if (p == "keep")
      low = surgery::low_policy::keep;
    else if (p == "leftmost")
      low = surgery::low_policy::leftmost;
    else
      throw validation_error(where + ": low_policy must be \"keep\" or "
                             "\"leftmost\"");
  }
  return surgery::thin_plan{
      enumerated_set_from_json(detail::field(j, "X", where), where + ".X"),
      coloring_from_json(detail::field(j, "h", where), where + ".h"),
      detail::uints_of(detail::field(j, "enforced", where), where),
      low};
}

inline surgery::value_plan value_plan_from_json(const json& j,
                                              const std::string& where = "plan") {
  return surgery::value_plan{
      enumerated_set_from_json(detail::field(j, "X", where), where + ".X"),
      coloring_from_json(detail::field(j, "h", where), where + ".h"),
      detail::uints_of(detail::field(j, "enforced", where), where)};
}

inline surgery::omega_horizon omega_horizon_from_json(
    const json& j, const std::string& where = "horizon") {
  surgery::omega_horizon h;
  if (j.contains("depth"))
    h.depth = detail::uint_of(j.at("depth"), where);
  if (j.contains("value_bound"))
    h.value_bound = detail::uint_of(j.at("value_bound"), where);
  if (h.depth == 0 || h.value_bound == 0)
    throw validation_error(where + ": horizons must be strictly positive");
  return h;
}

// ---- tree references ----
//
// A tree reference is either a registry string ("full-binary", "full-omega",
// "chain", "cone:011", "arithmetic:a,b") or an object naming a construction:
//   {"explicit": <FiniteTree>}              finite tree padded with 0-chains
//   {"cone": [..], "base": <tree-ref>}      restriction (base defaults to
//                                           the full binary tree)
//   {"thinned": {"base": <tree-ref>, "plan": <ThinPlan>}}
//   {"arithmetic": {"a":.., "b":..}}        omega tree of values a*k+b
inline lazy_tree tree_from_ref(const json& j,
                               const std::string& where = "tree") {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "full-binary") return full_binary_tree();
    if (s == "full-omega") return full_omega_tree();
    if (s == "chain") return chain_tree();
    if (s.rfind("cone:", 0) == 0) {
      std::vector<std::uint32_t> entries;
      for (char c : s.substr(5)) {
        if (c != '0' && c != '1')
          throw validation_error(where + ": cone path must be binary digits");
        entries.push_back(c == '1' ? 1 : 0);
      }
      return full_binary_tree().restrict_to(node(std::move(entries)));
    }
    if (s.rfind("arithmetic:", 0) == 0) {
      std::string rest = s.substr(11);
      std::size_t comma = rest.find(',');
      if (comma == std::string::npos)
        throw validation_error(where + ": expected arithmetic:a,b");
      try {
        std::uint64_t a = std::stoull(rest.substr(0, comma));
        std::uint64_t b = std::stoull(rest.substr(comma + 1));
        return arithmetic_omega_tree(a, b);
      } catch (const std::exception&) {
        throw validation_error(where + ": expected arithmetic:a,b");
      }
    }
    throw validation_error(where + ": unknown tree name '" + s + "'");
  }
  if (j.is_object()) {
    if (j.contains("explicit"))
      return from_finite(finite_tree_from_json(j.at("explicit"), where));
    if (j.contains("cone")) {
      lazy_tree base = j.contains("base")
                           ? tree_from_ref(j.at("base"), where + ".base")
                           : full_binary_tree();
      return base.restrict_to(node_from_json(j.at("cone"), where + ".cone"));
    }
    if (j.contains("thinned")) {
      const json& t = j.at("thinned");
      lazy_tree base = tree_from_ref(detail::field(t, "base", where),
                                     where + ".base");
      return surgery::sacks_thin(
          base, thin_plan_from_json(detail::field(t, "plan", where),
                                    where + ".plan"));
    }
    if (j.contains("arithmetic")) {
      const json& a = j.at("arithmetic");
      return arithmetic_omega_tree(
          detail::uint_of(detail::field(a, "a", where), where),
          detail::uint_of(detail::field(a, "b", where), where));
    }
  }
  throw validation_error(where + ": unrecognized tree reference");
}

// Reports describe a lazy tree by its registry name and cone; this is the
// descriptive half of the reference registry, not a loadable form.
inline json tree_describe(const lazy_tree& T) {
  json j;
  j["name"] = T.name();
  j["cone"] = node_to_json(T.cone());
  return j;
}

// ---- certificates ----

inline json shared_split_to_json(const surgery::shared_split& s) {
  json j;
  j["at"] = node_to_json(s.at);
  j["level"] = s.level;
  return j;
}

inline json certificate_to_json(const surgery::incompatibility_certificate& c) {
  json j;
  j["kind"] = surgery::forcing_kind_name(c.kind);
  j["divergence_level"] = c.divergence_level;
  j["checked_to"] = c.checked_to;
  if (c.value_bound) j["value_bound"] = *c.value_bound;
  json shared = json::array();
  for (const auto& s : c.shared) shared.push_back(shared_split_to_json(s));
  j["shared"] = shared;
  json violations = json::array();
  for (const auto& s : c.violations)
    violations.push_back(shared_split_to_json(s));
  j["violations"] = violations;
  j["passed"] = c.passed();
  return j;
}

// ---- silver conditions ----

inline surgery::silver_condition silver_from_json(
    const json& j, const std::string& where = "condition") {
  baire::enumerated_set free = enumerated_set_from_json(
      detail::field(j, "free", where), where + ".free");
  std::vector<bool> bits;
  if (j.contains("bits"))
    for (const json& b : j.at("bits"))
      bits.push_back(detail::uint_of(b, where + ".bits") != 0);
  return surgery::silver_condition::from_bits(std::move(free), std::move(bits));
}

// ---- finite posets ----

inline namecraft::finite_poset poset_from_json(
    const json& j, const std::string& where = "poset") {
  std::vector<std::string> elements;
  for (const json& e : detail::field(j, "elements", where)) {
    if (!e.is_string())
      throw validation_error(where + ": elements must be strings");
    elements.push_back(e.get<std::string>());
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const json& p : detail::field(j, "leq", where)) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() ||
        !p[1].is_string())
      throw validation_error(where + ": leq entries must be [a, b] pairs");
    pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  }
  return namecraft::finite_poset::closure_of(std::move(elements), pairs);
}

// ---- conditions, forbidden lists, schedules ----

inline qforcing::q_condition q_condition_from_json(
    const json& j, const std::string& where = "condition") {
  std::size_t n = detail::uint_of(detail::field(j, "n", where), where);
  finite_tree F =
      finite_tree_from_json(detail::field(j, "F", where), where + ".F");
  std::vector<std::pair<node, lazy_tree>> side;
  for (const json& entry : detail::field(j, "side", where)) {
    node leaf = node_from_json(detail::field(entry, "leaf", where),
                               where + ".leaf");
    side.emplace_back(leaf, tree_from_ref(detail::field(entry, "tree", where),
                                          where + ".tree"));
  }
  std::sort(side.begin(), side.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return qforcing::q_condition{n, std::move(F), std::move(side)};
}

inline json q_condition_to_json(const qforcing::q_condition& c) {
  json j;
  j["n"] = c.n;
  j["F"] = finite_tree_to_json(c.F);
  json side = json::array();
  for (const auto& [leaf, S] : c.side) {
    json entry;
    entry["leaf"] = node_to_json(leaf);
    entry["tree"] = tree_describe(S);
    side.push_back(entry);
  }
  j["side"] = side;
  return j;
}

inline qforcing::forbidden_list forbidden_from_json(
    const json& j, const std::string& where = "forbidden") {
  qforcing::forbidden_list fb;
  for (const json& t : detail::field(j, "trees", where))
    fb.trees.push_back(tree_from_ref(t, where));
  fb.depth = detail::uint_of(detail::field(j, "depth", where), where);
  if (fb.depth == 0)
    throw validation_error(where + ": depth must be strictly positive");
  return fb;
}

inline qforcing::leaf_selector leaf_selector_from_json(
    const json& j, const std::string& where = "leaf") {
  qforcing::leaf_selector sel;
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "first")
      sel.which = qforcing::leaf_selector::kind::first;
    else if (s == "last")
      sel.which = qforcing::leaf_selector::kind::last;
    else
      throw validation_error(where + ": expected \"first\", \"last\" or an index");
  } else {
    sel.which = qforcing::leaf_selector::kind::index;
    sel.index = detail::uint_of(j, where);
  }
  return sel;
}

inline std::vector<qforcing::q_task> schedule_from_json(
    const json& j, const std::string& where = "schedule") {
  if (!j.is_array()) throw validation_error(where + ": expected an array");
  std::vector<qforcing::q_task> out;
  for (const json& step : j) {
    std::string t = detail::field(step, "task", where).get<std::string>();
    qforcing::q_task task;
    if (t == "grow-split" || t == "ensure-compatible") {
      task.kind = t == "grow-split" ? qforcing::q_task_kind::grow_split
                                    : qforcing::q_task_kind::ensure_compatible;
      if (step.contains("leaf"))
        task.leaf = leaf_selector_from_json(step.at("leaf"), where);
    } else if (t == "avoid") {
      task.kind = qforcing::q_task_kind::avoid;
      task.forbidden_index =
          detail::uint_of(detail::field(step, "index", where), where);
    } else {
      throw validation_error(where + ": unknown task '" + t + "'");
    }
    out.push_back(task);
  }
  return out;
}

// ---- digest ----

// FNV-1a, 64-bit: the digest ties a report to the exact scenario text.
inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace treeforge::io
