#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "treeforge/surgery.hpp"

using namespace treeforge;
using namespace treeforge::surgery;
using baire::enumerated_set;

namespace {

std::set<std::uint64_t> ram_levels(const finite_tree& T) {
  std::set<std::uint64_t> out;
  for (const node& t : ramification_points(T)) out.insert(t.size());
  return out;
}

}  // namespace

TEST_CASE("colorings select one sub-block per family") {
  coloring h3 = coloring::modular(3);
  CHECK(h3.at(0) == 0);
  CHECK(h3.at(1) == 1);
  CHECK(h3.at(2) == 3);
  CHECK(h3.at(3) == 3);

  coloring bad = coloring::from_function([](std::uint64_t) { return 2; });
  CHECK_THROWS_AS(bad.at(1), validation_error);

  CHECK(divergence_index(0, 1) == 1);
  CHECK(divergence_index(2, 3) == 2);
  CHECK(divergence_index(0, 5) == 3);
  // Past the divergence index the modular pair picks distinct sub-blocks.
  std::vector<coloring> hs = ev_diff_family(6);
  for (std::size_t a = 0; a < hs.size(); ++a)
    for (std::size_t b = a + 1; b < hs.size(); ++b)
      for (std::uint64_t i = divergence_index(a, b); i < 8; ++i)
        CHECK(hs[a].at(i) != hs[b].at(i));
}

TEST_CASE("levels locate into dyadic windows of the scale") {
  enumerated_set evens = enumerated_set::affine(2, 0);
  CHECK_FALSE(locate_window(evens, 1).has_value());

  window_ref w2 = locate_window(evens, 2).value();
  CHECK(w2.family == 0);
  CHECK(w2.sub_block == 0);
  CHECK(w2.span == baire::interval{2, 4});

  window_ref w7 = locate_window(evens, 7).value();
  CHECK(w7.family == 1);
  CHECK(w7.sub_block == 1);
  CHECK(w7.span == baire::interval{6, 8});

  window_ref w16 = locate_window(evens, 16).value();
  CHECK(w16.family == 3);
  CHECK(w16.sub_block == 0);

  coloring h0 = coloring::modular(0);
  CHECK(split_permitted(evens, h0, 0));  // low region
  CHECK(split_permitted(evens, h0, 2));
  CHECK(split_permitted(evens, h0, 5));
  CHECK_FALSE(split_permitted(evens, h0, 6));
  coloring h1 = coloring::modular(1);
  CHECK(split_permitted(evens, h1, 6));
  CHECK_FALSE(split_permitted(evens, h1, 4));
}

TEST_CASE("the obeys predicate certifies families block by block") {
  enumerated_set evens = enumerated_set::affine(2, 0);
  obey_report full = sacks_weakly_obeys_at(full_binary_tree(), evens, 1,
                                           ramify_mode::inclusive);
  CHECK(full.holds);
  CHECK(full.failures.empty());
  // 16 boundary nodes at level 4 plus 64 at level 6, each its own witness.
  CHECK(full.witnesses.size() == 80);
  for (const auto& [start, witness] : full.witnesses) CHECK(start == witness);

  obey_report flat =
      sacks_weakly_obeys_at(chain_tree(), evens, 0, ramify_mode::inclusive);
  CHECK_FALSE(flat.holds);
  REQUIRE(flat.failures.size() == 1);
  CHECK(flat.failures[0] == node{0, 0});

  // A split on the last level of a block counts inclusively, not strictly.
  enumerated_set X = enumerated_set::explicit_prefix({0, 3, 5});
  finite_tree one_split = finite_tree::closure(
      width_t::binary,
      {node{0, 0, 0, 0, 0, 0}, node{0, 0, 0, 0, 1, 0}});
  lazy_tree T = from_finite(one_split);
  CHECK(sacks_weakly_obeys_at(T, X, 0, ramify_mode::inclusive).holds);
  CHECK_FALSE(sacks_weakly_obeys_at(T, X, 0, ramify_mode::strict_below).holds);

  CHECK(good_blocks(full_binary_tree(), evens, 2, ramify_mode::inclusive) ==
        std::vector<std::uint64_t>{0, 1, 2});
  CHECK(good_blocks(chain_tree(), evens, 2, ramify_mode::inclusive).empty());
}

TEST_CASE("thinning keeps one split per enforced sub-block") {
  enumerated_set evens = enumerated_set::affine(2, 0);
  thin_plan plan{evens, coloring::modular(0), {0, 1, 2, 3}, low_policy::keep};
  lazy_tree thin = sacks_thin(full_binary_tree(), plan);

  finite_tree cut = truncate(thin, 16);
  CHECK(ram_levels(cut) == std::set<std::uint64_t>{0, 1, 2, 4, 8});
  CHECK(cut.at_level(16).size() == 32);
  // The published splitting gap covers everything up to the last block.
  CHECK(verify_splitting_bound(thin, 16).empty());

  // Last sub-blocks instead of first ones, and a bare stem below mu(1).
  coloring last = coloring::from_function(
      [](std::uint64_t i) { return baire::pow2(i) - 1; }, "last");
  thin_plan plan2{evens, last, {0, 1, 2}, low_policy::leftmost};
  finite_tree cut2 = truncate(sacks_thin(full_binary_tree(), plan2), 16);
  CHECK(ram_levels(cut2) == std::set<std::uint64_t>{2, 6, 14});
  CHECK(cut2.at_level(1) == std::vector<node>{node{0}});
  CHECK(cut2.at_level(16).size() == 8);

  CHECK_THROWS_AS(
      sacks_thin(full_binary_tree(),
                 thin_plan{evens, coloring::modular(0), {1, 1}, low_policy::keep}),
      validation_error);

  // Enforcing a family whose selected sub-block has no split in the base
  // fails at construction, naming the family.
  finite_tree low_only = finite_tree::closure(
      width_t::binary, {node{0, 0}, node{0, 1}, node{1, 0}, node{1, 1}});
  thin_plan bad{evens, coloring::modular(0), {1}, low_policy::keep};
  CHECK_THROWS_WITH(sacks_thin(from_finite(low_only), bad),
                    Catch::Matchers::ContainsSubstring("family 1"));
}

TEST_CASE("thinned trees with diverging colorings are incompatible") {
  enumerated_set evens = enumerated_set::affine(2, 0);
  thin_plan p0{evens, coloring::modular(0), {0, 1, 2}, low_policy::keep};
  thin_plan p1{evens, coloring::modular(1), {0, 1, 2}, low_policy::keep};
  lazy_tree t0 = sacks_thin(full_binary_tree(), p0);
  lazy_tree t1 = sacks_thin(full_binary_tree(), p1);

  // The colorings diverge from family 1 on, so any split the two trees
  // share sits below mu(2) = 4.
  incompatibility_certificate cert = sacks_incompatibility(t0, t1, 4, 16);
  CHECK(cert.passed());
  CHECK(cert.shared.size() == 7);  // full low region plus the family-0 split
  for (const shared_split& s : cert.shared) CHECK(s.level < 4);

  // Identical plans share their deep splits; the same claim now fails and
  // the violations say where.
  lazy_tree t0b = sacks_thin(full_binary_tree(), p0);
  incompatibility_certificate same = sacks_incompatibility(t0, t0b, 4, 16);
  CHECK_FALSE(same.passed());
  CHECK(same.shared.size() == 7);
  CHECK(same.violations.size() == 24);  // 8 splits at level 4, 16 at level 8
}

TEST_CASE("antichain assembly thins and certifies all pairs") {
  enumerated_set evens = enumerated_set::affine(2, 0);
  std::vector<lazy_tree> inputs;
  for (int k = 0; k < 4; ++k) inputs.push_back(full_binary_tree());

  antichain_result r = antichain_build(evens, inputs, 2, 16);
  REQUIRE(r.conditions.size() == 4);
  CHECK(r.certificates.size() == 6);
  CHECK(r.all_passed());
  for (const auto& pc : r.certificates) {
    CHECK(pc.cert.divergence_level ==
          evens.mu(baire::pow2(divergence_index(pc.a, pc.b))));
    for (const shared_split& s : pc.cert.shared)
      CHECK(s.level < pc.cert.divergence_level);
  }
  // Every enforced family really was certified good for its input.
  for (const thin_plan& p : r.plans)
    CHECK(p.enforced == std::vector<std::uint64_t>{0, 1, 2});

  inputs[1] = chain_tree();
  CHECK_THROWS_WITH(antichain_build(evens, inputs, 2, 16),
                    Catch::Matchers::ContainsSubstring("input 1"));
}
