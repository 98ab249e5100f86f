#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <rcising/graphs.hpp>
#include <rcising/oracles/identities.hpp>

namespace rcising::oracles {
namespace {

// Z^S by summing w_β(n) over multiplicities 0..K-1 per edge; independent of the
// parity reduction. Only for graphs with a handful of edges.
double brute_partition(const Graph& g, double beta, const VertexSet& S, int K,
                       const std::function<bool(const Current&)>& event = nullptr) {
  const std::size_t m = g.num_edges();
  Current n(m);
  double z = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t e) {
    if (e == m) {
      if (sources(g, n) != S) return;
      if (event && !event(n)) return;
      z += std::exp(log_weight(n, beta));
      return;
    }
    for (int k = 0; k < K; ++k) {
      n.multiplicity[e] = static_cast<std::uint32_t>(k);
      rec(e + 1);
    }
  };
  rec(0);
  return z;
}

TEST(SpinExpectation, Examples) {
  EXPECT_NEAR(spin_expectation(graphs::complete2(), 1.0, {0, 1}), 0.7615941559557649, 1e-12);
  EXPECT_NEAR(spin_expectation(graphs::path(3), 0.5, {0, 2}), 0.21355226703407257, 1e-12);
  EXPECT_DOUBLE_EQ(spin_expectation(graphs::cycle(4), 0.8, {}), 1.0);
  EXPECT_THROW(spin_expectation(build_lattice(2, 5, Geometry::Torus), 0.3, {0, 1}), OracleSizeError);
}

TEST(SpinExpectation, GoldenFixtures) {
  std::ifstream in(std::string(RCISING_FIXTURES) + "/golden_oracles.txt");
  ASSERT_TRUE(in.good());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, '|')) f.push_back(item);
    ASSERT_GE(f.size(), 4u);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    const Graph g = graphs::parse(trim(f[0]));
    const double beta = std::stod(f[1]);
    VertexSet S;
    std::stringstream vs(trim(f[2]));
    while (std::getline(vs, item, ',')) S.push_back(static_cast<Vertex>(std::stoul(item)));
    const double expected = std::stod(f[3]);
    EXPECT_NEAR(spin_expectation(g, beta, S), expected, 1e-12) << line;
    EXPECT_NEAR(correlation_via_currents(g, beta, S), expected, 1e-12) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 6);
}

TEST(Corpus, MatchesAtlasCounts) {
  std::ifstream in(std::string(RCISING_FIXTURES) + "/corpus_small.txt");
  ASSERT_TRUE(in.good());
  std::map<std::pair<std::size_t, std::size_t>, int> expected, got;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::size_t v, e;
    int c;
    ss >> v >> e >> c;
    expected[{v, e}] = c;
  }
  for (const Graph& g : graphs::connected_corpus(5, 6)) ++got[{g.num_vertices(), g.num_edges()}];
  EXPECT_EQ(got, expected);
}

TEST(ParityEnumeration, AgreesWithMultiplicitySums) {
  for (const Graph& g : {graphs::complete2(), graphs::path(3), graphs::cycle(3)}) {
    for (double beta : {0.5, 1.0}) {
      for (const VertexSet& S : graphs::even_subsets(g.num_vertices(), {0, 2})) {
        const double brute = brute_partition(g, beta, S, 22);
        EXPECT_NEAR(partition_function(g, beta, S), brute, 1e-12 * std::max(1.0, brute));
      }
    }
  }
  // An event seen through (parity, trace): edge 0 even and positive.
  const Graph c3 = graphs::cycle(3);
  const double brute =
      brute_partition(c3, 0.7, {}, 22, [](const Current& n) { return n[0] > 0 && n[0] % 2 == 0; }) /
      brute_partition(c3, 0.7, {}, 22);
  const auto exact = current_event_prob(c3, 0.7, {},
                                        [](const ParityState& p, const BondConfig&) { return p[0] == Parity::EvenPositive; });
  EXPECT_NEAR(exact.probability, brute, 1e-12);
}

TEST(CurrentEventProb, Examples) {
  const Graph k2 = graphs::complete2();
  const auto nonzero = current_event_prob(k2, 1.0, {}, [](const ParityState&, const BondConfig& c) { return c[0]; });
  EXPECT_NEAR(nonzero.probability, (std::cosh(1.0) - 1) / std::cosh(1.0), 1e-14);
  EXPECT_NEAR(nonzero.probability, 0.3519457263361146, 1e-12);

  const auto all = current_event_prob(k2, 1.0, {0, 1}, [](const ParityState&, const BondConfig&) { return true; });
  EXPECT_DOUBLE_EQ(all.probability, 1.0);
  EXPECT_NEAR(all.partition, 1.1752011936438014, 1e-14);

  const auto allodd = current_event_prob(graphs::cycle(4), 1.0, {}, [](const ParityState& p, const BondConfig&) {
    for (EdgeId e = 0; e < 4; ++e)
      if (!p.odd(e)) return false;
    return true;
  });
  EXPECT_NEAR(allodd.probability, 0.2517377069498513, 1e-12);
}

TEST(CurrentEventProb, ZeroMassIsDistinctFromZeroProbability) {
  const Graph two_components = Graph::from_edges(4, {{0, 1}, {2, 3}});
  EXPECT_THROW(current_event_prob(two_components, 1.0, {0, 2},
                                  [](const ParityState&, const BondConfig&) { return true; }),
               ZeroMassError);
  const auto never = current_event_prob(two_components, 1.0, {0, 1},
                                        [](const ParityState&, const BondConfig&) { return false; });
  EXPECT_EQ(never.probability, 0.0);
  EXPECT_THROW(partition_function(build_lattice(2, 3, Geometry::Torus), 1.0, {}), OracleSizeError);
}

TEST(CorrelationViaCurrents, MatchesSpinsOnCorpus) {
  for (const Graph& g : graphs::connected_corpus(5, 6)) {
    for (double beta : {0.25, 0.5, 1.0}) {
      const SpinSum spins(g, beta);
      for (const VertexSet& S : graphs::even_subsets(g.num_vertices(), {0, 2, 4})) {
        const double a = correlation_via_currents(g, beta, S);
        const double b = spins.expectation(S);
        EXPECT_LE(std::abs(a - b), 1e-10 * std::max(std::abs(b), 1e-300)) << g.name();
      }
    }
  }
}

TEST(TraceLaw, SingleAgreesWithExplicitEnumeration) {
  for (const Graph& g : {graphs::cycle(4), graphs::torus2x2(), graphs::parse("5:0-1,1-2,2-3,3-4,0-4,1-3")}) {
    for (const VertexSet& S : graphs::even_subsets(g.num_vertices(), {0, 2})) {
      const TraceLaw fast = single_trace_law(g, 0.6, S);
      TraceLaw slow(fast.size(), 0.0);
      for_each_parity_state(g, 0.6, S, [&](const ParityState& p, double w) { slow[bonds_to_mask(trace(p))] += w; });
      for (std::size_t m = 0; m < fast.size(); ++m) EXPECT_NEAR(fast[m], slow[m], 1e-13 * (1 + slow[m]));
    }
  }
}

TEST(TraceLaw, JointAgreesWithPairEnumeration) {
  const Graph g = graphs::parse("4:0-1,1-2,2-3,0-3,0-2");
  const VertexSet s1{0, 2}, s2{1, 3};
  const TraceLaw fast = joint_trace_law(g, 0.8, s1, s2);
  std::vector<std::pair<std::uint32_t, double>> a, b;
  for_each_parity_state(g, 0.8, s1, [&](const ParityState& p, double w) { a.emplace_back(bonds_to_mask(trace(p)), w); });
  for_each_parity_state(g, 0.8, s2, [&](const ParityState& p, double w) { b.emplace_back(bonds_to_mask(trace(p)), w); });
  TraceLaw slow(fast.size(), 0.0);
  for (auto [ma, wa] : a)
    for (auto [mb, wb] : b) slow[ma | mb] += wa * wb;
  for (std::size_t m = 0; m < fast.size(); ++m) EXPECT_NEAR(fast[m], slow[m], 1e-12 * (1 + slow[m]));
  EXPECT_NEAR(total(fast), partition_function(g, 0.8, s1) * partition_function(g, 0.8, s2), 1e-10);
}

TEST(Switching, Examples) {
  const Graph k2 = graphs::complete2();
  const auto r = verify_switching(k2, 1.0, {0, 1}, {0, 1}, [](const BondConfig&) { return true; });
  EXPECT_NEAR(r.lhs, 1.3810978455418155, 1e-12);
  EXPECT_NEAR(r.rhs, 1.3810978455418155, 1e-12);
  EXPECT_LE(r.abs_diff, 1e-12);

  const Graph c4 = graphs::cycle(4);
  const auto id = verify_switching(c4, 0.7, {}, {}, [](const BondConfig&) { return true; });
  const double z0 = partition_function(c4, 0.7, {});
  EXPECT_NEAR(id.lhs, z0 * z0, 1e-12 * z0 * z0);
  EXPECT_NEAR(id.rhs, z0 * z0, 1e-12 * z0 * z0);

  const auto conn = verify_switching(c4, 1.0, {0, 2}, {1, 3},
                                     [&](const BondConfig& c) { return connected(c4, c, 0, 1); });
  EXPECT_LE(conn.abs_diff, 1e-10 * std::max(1.0, conn.lhs));
  EXPECT_GT(conn.lhs, 0);

  EXPECT_THROW(verify_switching(c4, 1.0, {0}, {}, [](const BondConfig&) { return true; }), ConfigError);
}

TEST(Switching, HoldsOnCorpusSample) {
  for (const Graph& g : graphs::connected_corpus(4, 5)) {
    const auto events = standard_switching_events(g);
    EXPECT_GE(events.size(), 1u);
    const auto sets = graphs::even_subsets(g.num_vertices(), {0, 2});
    for (const auto& s1 : sets)
      for (const auto& s2 : sets)
        for (const auto& r : verify_switching(g, 0.5, s1, s2, events))
          EXPECT_LE(r.abs_diff, 1e-10 * std::max(1.0, std::abs(r.lhs))) << g.name() << ' ' << r.event;
  }
}

TEST(Ursell, Examples) {
  const Graph c4 = graphs::cycle(4);
  const auto chk = ursell_representation_check(c4, 0.5, 0, 1, 2, 3);
  EXPECT_NEAR(chk.lhs, chk.rhs, 1e-12);
  EXPECT_LE(chk.lhs, 0.0);
  EXPECT_LT(chk.lhs, -1e-6);

  EXPECT_NEAR(ursell4(c4, 1e-7, 0, 1, 2, 3), 0.0, 1e-12);

  const auto deg = ursell_representation_check(graphs::complete2(), 0.9, 0, 1, 0, 1);
  EXPECT_NEAR(deg.lhs, -2 * std::pow(std::tanh(0.9), 2), 1e-12);
  EXPECT_NEAR(deg.lhs, deg.rhs, 1e-12);
}

TEST(Ursell, LebowitzAndRepresentationOnCorpus) {
  for (const Graph& g : graphs::connected_corpus(4, 6)) {
    const std::size_t n = g.num_vertices();
    for (double beta : {0.25, 1.0}) {
      const SpinSum spins(g, beta);
      for (Vertex a = 0; a < n; ++a)
        for (Vertex b = 0; b < n; ++b)
          for (Vertex c = 0; c < n; ++c)
            for (Vertex d = 0; d < n; ++d) EXPECT_LE(spins.ursell4(a, b, c, d), 1e-12);
    }
    if (n == 4) {
      const auto chk = ursell_representation_check(g, 0.5, 0, 3, 1, 2);
      EXPECT_NEAR(chk.lhs, chk.rhs, 1e-10) << g.name();
    }
  }
}

TEST(Backbone, DecompositionExamples) {
  const double beta = 0.6;
  const auto path = backbone_weights(graphs::path(3), beta, 0, 2);
  ASSERT_EQ(path.rho.size(), 1u);
  EXPECT_NEAR(path.rho.begin()->second, std::pow(std::tanh(beta), 2), 1e-12);

  const auto k2 = backbone_weights(graphs::complete2(), beta, 0, 1);
  ASSERT_EQ(k2.rho.size(), 1u);
  EXPECT_NEAR(k2.rho.begin()->second, std::tanh(beta), 1e-12);

  const Graph c4 = graphs::cycle(4);
  const auto cyc = backbone_weights(c4, beta, 0, 2);
  ASSERT_EQ(cyc.rho.size(), 2u);
  EXPECT_EQ(cyc.rho.begin()->first, (std::vector<EdgeId>{0, 1}));
  EXPECT_NEAR(cyc.rho_total, cyc.two_point_spin, 1e-12);
  EXPECT_THROW(backbone_weights(c4, beta, 1, 1), ConfigError);
}

TEST(Backbone, DecompositionAndChainRuleOnCorpus) {
  for (const Graph& g : graphs::connected_corpus(5, 6)) {
    const std::size_t n = g.num_vertices();
    for (double beta : {0.25, 1.0}) {
      for (Vertex x = 0; x < n; ++x)
        for (Vertex y = x + 1; y < n; ++y) {
          const auto bd = backbone_weights(g, beta, x, y);
          EXPECT_NEAR(bd.rho_total, bd.two_point_spin, 1e-10 * bd.two_point_spin) << g.name();
          for (Vertex u = 0; u < n; ++u)
            for (Vertex v = 0; v < n; ++v) {
              const auto cr = chain_rule_probe(g, beta, x, y, u, v);
              EXPECT_LE(cr.lhs, cr.bound + 1e-12) << g.name() << " " << x << y << u << v;
            }
        }
    }
  }
}

TEST(ChainRule, Examples) {
  const auto eq = chain_rule_probe(graphs::path(3), 0.7, 0, 2, 1, 1);
  EXPECT_NEAR(eq.lhs, 1.0, 1e-14);
  EXPECT_NEAR(eq.bound, 1.0, 1e-12);

  // Vertex 3 hangs off vertex 0 and lies on no 0-2 path.
  const auto off = chain_rule_probe(graphs::parse("4:0-1,1-2,0-3"), 0.7, 0, 2, 3, 3);
  EXPECT_EQ(off.lhs, 0.0);
  EXPECT_GT(off.bound, 0.0);

  // Each arc of the 4-cycle carries the backbone with equal weight.
  const auto c4 = chain_rule_probe(graphs::cycle(4), 0.5, 0, 2, 1, 1);
  EXPECT_LE(c4.lhs, c4.bound);
  EXPECT_NEAR(c4.lhs, 0.5, 1e-12);
}

TEST(Fk, Examples) {
  const Graph k2 = graphs::complete2();
  const auto open = [](const BondConfig& c) { return c[0]; };
  EXPECT_NEAR(fk_exact(k2, {Boundary::Free, 1.0, {}, {}}, open), std::tanh(1.0), 1e-14);
  EXPECT_NEAR(fk_exact(k2, {Boundary::Free, 1e-9, {}, {}}, open), 0.0, 1e-8);
  EXPECT_NEAR(fk_exact(k2, {Boundary::Wired, 1.0, {}, {0, 1}}, open), 0.8646647167633873, 1e-14);
  EXPECT_THROW(fk_exact(Graph::from_edges(3, {{0, 1}}), {Boundary::Free, 1.0, {0, 2}, {}}, open), ZeroMassError);
}

TEST(Fk, TwoPointEqualsConnectionProbability) {
  for (const Graph& g : graphs::connected_corpus(4, 6)) {
    const SpinSum spins(g, 0.4);
    for (Vertex y = 1; y < g.num_vertices(); ++y) {
      const double conn = fk_exact(g, {Boundary::Free, 0.4, {}, {}},
                                   [&](const BondConfig& c) { return connected(g, c, 0, y); });
      EXPECT_NEAR(conn, spins.two_point(0, y), 1e-12) << g.name();
    }
  }
}

TEST(Griffiths, MonotoneInBetaAndEdges) {
  for (const Graph& g : graphs::connected_corpus(4, 5)) {
    double prev = 0;
    for (double beta : {0.1, 0.3, 0.6, 1.2}) {
      const double v = spin_expectation(g, beta, {0, static_cast<Vertex>(g.num_vertices() - 1)});
      if (g.num_vertices() > 1) {
        EXPECT_GE(v, prev - 1e-14);
      }
      prev = v;
    }
  }
  const double fewer = spin_expectation(graphs::path(4), 0.5, {0, 3});
  const double more = spin_expectation(graphs::cycle(4), 0.5, {0, 3});
  EXPECT_GE(more, fewer);
}

TEST(Coupling, Examples) {
  const Graph k2 = graphs::complete2();
  const auto open = [](const BondConfig& c) { return c[0]; };
  const auto free = coupling_exact_check(k2, 1.0, {}, open);
  EXPECT_NEAR(free.lhs, std::tanh(1.0), 1e-14);
  EXPECT_NEAR(free.lhs, free.rhs, 1e-14);
  const auto forced = coupling_exact_check(k2, 1.0, {0, 1}, open);
  EXPECT_NEAR(forced.lhs, 1.0, 1e-14);
  EXPECT_NEAR(forced.rhs, 1.0, 1e-14);
  const Graph p3 = graphs::path(3);
  const auto both = coupling_exact_check(p3, 0.8, {0, 2}, [](const BondConfig& c) { return c[0] && c[1]; });
  EXPECT_NEAR(both.lhs, 1.0, 1e-14);
  EXPECT_NEAR(both.rhs, 1.0, 1e-14);
}

TEST(Coupling, TotalVariationVanishesOnSmallCorpus) {
  for (const Graph& g : graphs::connected_corpus(5, 4))
    for (const VertexSet& S : graphs::even_subsets(g.num_vertices(), {0, 2}))
      EXPECT_LE(coupling_tv_distance(g, 0.7, S), 1e-10) << g.name();
}

TEST(Derivative, RingOfFour) {
  const Graph ring = build_lattice(1, 4, Geometry::Torus);
  const auto r = derivative_identity_probe(ring, 0.3, 1e-4);
  EXPECT_LT(std::abs(r.fd - r.spin_form), 1e-6);
  EXPECT_LT(std::abs(r.fd - r.current_form), 1e-6);
  EXPECT_LT(std::abs(r.spin_form - r.current_form), 1e-10);
  EXPECT_LT(r.discretization, 1e-6);
}

TEST(Derivative, HighTemperatureLimit) {
  const Graph t = build_lattice(2, 3, Geometry::Torus);
  const auto r = derivative_identity_probe(t, 2e-4, 1e-4);
  EXPECT_NEAR(r.current_form, 4.0, 1e-2);
  EXPECT_NEAR(r.spin_form, 4.0, 1e-2);
}

TEST(Derivative, FreeBoxOnlySpinForm) {
  const Graph box = build_lattice(1, 2, Geometry::FreeBox);
  EXPECT_THROW(derivative_identity_probe(box, 0.3, 1e-4), ConfigError);
  const auto r = derivative_identity_probe(box, 0.3, 1e-4, false);
  EXPECT_LT(std::abs(r.fd - r.spin_form), 1e-6);
  EXPECT_TRUE(std::isnan(r.current_form));
}

}  // namespace
}  // namespace rcising::oracles
