#include <doctest.h>

#include <random>

#include "dgp/error.hpp"
#include "dgp/metapath.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dgp;

namespace {

// 0 -r1-> 1 -r2-> 2, 0 -r1-> 3 -r2-> 2, 3 -r2-> 4
HeteroGraph diamond() {
  GraphBuilder b;
  for (int i = 0; i < 5; ++i) {
    b.add_node(std::to_string(i), "t", "", std::vector<double>{double(i), 0.0}, std::nullopt);
  }
  b.add_edge("r1", "0", "1").add_edge("r1", "0", "3");
  b.add_edge("r2", "1", "2").add_edge("r2", "3", "2").add_edge("r2", "3", "4");
  return std::move(b).build();
}

oracle::Dense dense_of(const SparseMatrix& m) {
  oracle::Dense d(m.rows(), std::vector<double>(m.cols(), 0.0));
  for (const auto& e : m.entries()) d[e.row][e.col] = e.value;
  return d;
}

}  // namespace

TEST_SUITE("metapath") {
  TEST_CASE("composition counts typed walks") {
    const auto g = diamond();
    const auto a = compose_metapath(g, Metapath::of({"r1", "r2"}));
    CHECK(a.at(0, 2) == 2);
    CHECK(a.at(0, 4) == 1);
    CHECK(a.nnz() == 2);
    CHECK(metapath_neighborhood(a, 0) == std::vector<NodeId>{2, 4});
    CHECK(metapath_neighborhood(a, 1).empty());
    // Relation order matters.
    CHECK(compose_metapath(g, Metapath::of({"r2", "r1"})).nnz() == 0);
  }

  TEST_CASE("metapath validation") {
    const auto g = diamond();
    CHECK(Metapath::of({"r1", "r2"}).name == "r1/r2");
    CHECK(Metapath::of({"r1"}, "custom").name == "custom");
    CHECK_THROWS_AS(validate(Metapath::of({}), g), ValidationError);
    CHECK_THROWS_AS(validate(Metapath::of({"r9"}), g), ValidationError);
    CHECK_THROWS_AS(compose_metapath(g, Metapath::of({"r1", "nope"})), ValidationError);
    CHECK_THROWS_AS((DiffusionConfig{0, 8}).validate(), ValidationError);
    CHECK_THROWS_AS((DiffusionConfig{1, 0}).validate(), ValidationError);
  }

  TEST_CASE("composition agrees with walk enumeration on random graphs") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
      const auto rg = fixtures::random_graph(rng, 2 + rng() % 7, 1 + rng() % 3, 0.35, 2, 0,
                                             trial % 2 == 0);
      const auto rels = fixtures::random_metapath(rng, rg.relations, 3);
      const auto a = compose_metapath(rg.graph, Metapath::of(rels));
      const auto expected = oracle::path_counts(rg.typed, rels);
      for (std::size_t u = 0; u < rg.typed.n; ++u) {
        for (std::size_t w = 0; w < rg.typed.n; ++w) CHECK(a.at(u, w) == expected[u][w]);
        const auto hood = metapath_neighborhood(a, u);
        const auto reach = oracle::reachable(rg.typed, rels, u);
        CHECK(std::vector<std::size_t>(reach.begin(), reach.end()) == hood);
      }
    }
  }

  TEST_CASE("composition overflow is reported") {
    // Complete bipartite layers of 2^22 fan-out would be too big to build, so
    // stack a small dense graph many times instead: walk counts grow as n^L.
    GraphBuilder b(IngestOptions{false});
    const int n = 16;
    for (int i = 0; i < n; ++i) b.add_node(fixtures::node_name(i), "t", "", std::nullopt, std::nullopt);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b.add_edge("r", fixtures::node_name(i), fixtures::node_name(j));
    }
    const auto g = std::move(b).build();
    // 16^16 = 2^64 walks between every pair.
    CHECK_THROWS_AS(compose_metapath(g, Metapath::of(std::vector<std::string>(17, "r"))),
                    std::overflow_error);
    CHECK(compose_metapath(g, Metapath::of(std::vector<std::string>(15, "r"))).at(0, 0) ==
          (std::uint64_t{1} << 56));
  }

  TEST_CASE("transition matrix keeps zero rows") {
    const auto g = diamond();
    const auto t = transition_matrix(compose_metapath(g, Metapath::of({"r1", "r2"})));
    CHECK(t.matrix.at(0, 2) == doctest::Approx(2.0 / 3.0));
    CHECK(t.matrix.at(0, 4) == doctest::Approx(1.0 / 3.0));
    CHECK(t.zero_rows == std::vector<NodeId>{1, 2, 3, 4});
    CHECK(t.matrix.row_cols(1).empty());
  }

  TEST_CASE("diffusion operator row sums") {
    // A single 2-cycle: every row is full.
    const auto t = SparseMatrix::from_entries(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto z = diffusion_operator(t, k);
      for (std::size_t r = 0; r < 2; ++r) {
        double s = 0;
        for (double v : z.row_values(r)) s += v;
        CHECK(s == doctest::Approx(double(k + 1) / double(k)).epsilon(1e-14));
      }
    }
    CHECK_THROWS_AS(diffusion_operator(t, 0), ValidationError);
    // K = 1 example: Z = I + T.
    const auto z1 = diffusion_operator(t, 1);
    CHECK(z1.at(0, 0) == 1.0);
    CHECK(z1.at(0, 1) == 1.0);
  }

  TEST_CASE("diffusion operator matches dense power sums") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 25; ++trial) {
      const auto rg = fixtures::random_graph(rng, 2 + rng() % 7, 2, 0.3);
      const auto rels = fixtures::random_metapath(rng, rg.relations, 2);
      const auto a = compose_metapath(rg.graph, Metapath::of(rels));
      const auto t = transition_matrix(a);
      const std::size_t k = 1 + rng() % 4;
      const auto z = diffusion_operator(t.matrix, k);
      oracle::Dense da(rg.typed.n, std::vector<double>(rg.typed.n, 0.0));
      const auto counts = oracle::path_counts(rg.typed, rels);
      for (std::size_t i = 0; i < rg.typed.n; ++i) {
        for (std::size_t j = 0; j < rg.typed.n; ++j) da[i][j] = double(counts[i][j]);
      }
      const auto expected = oracle::power_sum(oracle::row_normalize(da), k);
      const auto got = dense_of(z);
      for (std::size_t i = 0; i < rg.typed.n; ++i) {
        for (std::size_t j = 0; j < rg.typed.n; ++j) {
          CHECK(got[i][j] == doctest::Approx(expected[i][j]).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("lazy and materialized embedders agree with Z X") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
      const auto rg = fixtures::random_graph(rng, 3 + rng() % 8, 2, 0.3, 3);
      const auto t = transition_matrix(compose_metapath(rg.graph, Metapath::of({rg.relations[0]})));
      const std::size_t k = 1 + rng() % 3;
      const auto h = diffusion_embeddings(diffusion_operator(t.matrix, k), rg.graph.features());
      const DiffusionEmbedder dense(t.matrix, rg.graph.features(), k, 1'000);
      const DiffusionEmbedder lazy(t.matrix, rg.graph.features(), k, 0);
      CHECK(dense.materialized());
      CHECK(!lazy.materialized());
      for (NodeId v = 0; v < rg.graph.num_nodes(); ++v) {
        const auto a = dense.embedding(v);
        const auto b = lazy.embedding(v);
        for (std::size_t c = 0; c < a.size(); ++c) {
          CHECK(a[c] == doctest::Approx(h(v, c)).epsilon(1e-12));
          CHECK(b[c] == doctest::Approx(h(v, c)).epsilon(1e-12));
        }
      }
      CHECK_THROWS_AS(lazy.embedding(rg.graph.num_nodes()), std::out_of_range);
    }
  }

  TEST_CASE("select_nearest breaks ties by id and skips the target") {
    DenseMatrix e(5, 1);
    e(0, 0) = 0.0;
    e(1, 0) = 1.0;
    e(2, 0) = -1.0;
    e(3, 0) = 2.0;
    e(4, 0) = 1.0;
    const std::vector<NodeId> cands{4, 3, 2, 1, 0};
    const auto got = select_nearest(e, 0, cands, 3);
    REQUIRE(got.size() == 3);
    CHECK(got[0] == Neighbor{1, 1.0});
    CHECK(got[1] == Neighbor{2, 1.0});
    CHECK(got[2] == Neighbor{4, 1.0});
    CHECK(select_nearest(e, 0, cands, 10).size() == 4);
    CHECK(select_nearest(e, 0, std::vector<NodeId>{0}, 3).empty());
  }

  TEST_CASE("trim matches a brute-force ranking") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      const auto rg = fixtures::random_graph(rng, 3 + rng() % 8, 2, 0.4, 2, rng() % 3);
      const auto rels = fixtures::random_metapath(rng, rg.relations, 2);
      DiffusionConfig cfg;
      cfg.hops = 1 + rng() % 3;
      cfg.max_neighbors = 1 + rng() % 4;
      cfg.dense_threshold = trial % 2 ? 0 : 1000;
      const MetapathTrimmer trimmer(rg.graph, Metapath::of(rels), cfg, rg.graph.features());

      const std::size_t n = rg.typed.n;
      oracle::Dense da(n, std::vector<double>(n, 0.0));
      const auto counts = oracle::path_counts(rg.typed, rels);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) da[i][j] = double(counts[i][j]);
      }
      oracle::Dense x(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = rg.graph.features().row(i);
        x[i].assign(row.begin(), row.end());
      }
      const auto h = oracle::matmul(oracle::power_sum(oracle::row_normalize(da), cfg.hops), x);
      for (NodeId v = 0; v < n; ++v) {
        const auto got = trimmer.trim(v);
        const auto want = oracle::nearest(h, v, oracle::reachable(rg.typed, rels, v), cfg.max_neighbors);
        REQUIRE(got.neighbors.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
          CHECK(got.neighbors[i].id == want[i].id);
          CHECK(got.neighbors[i].distance == doctest::Approx(want[i].distance).epsilon(1e-9));
        }
        CHECK(got.target == v);
      }
    }
  }

  TEST_CASE("trim_neighborhood wrapper") {
    const auto g = diamond();
    DiffusionConfig cfg;
    cfg.max_neighbors = 1;
    const auto t = trim_neighborhood(g, Metapath::of({"r1", "r2"}), 0, cfg, g.features());
    REQUIRE(t.neighbors.size() == 1);
    CHECK_THROWS_AS(trim_neighborhood(g, Metapath::of({"r1"}), 99, cfg, g.features()), std::out_of_range);
    DenseMatrix wrong(2, 2);
    CHECK_THROWS_AS(MetapathTrimmer(g, Metapath::of({"r1"}), cfg, wrong), std::invalid_argument);
  }

  TEST_CASE("enumeration order and candidates") {
    const auto g = diamond();
    const auto all = enumerate_metapaths(g, 2);
    REQUIRE(all.size() == 6);
    CHECK(all[0].name == "r1");
    CHECK(all[1].name == "r2");
    CHECK(all[2].name == "r1/r1");
    CHECK(all[3].name == "r1/r2");
    CHECK(all[5].name == "r2/r2");
    const auto cands = metapath_candidates(g, 2);
    REQUIRE(cands.size() == 6);
    CHECK(cands[3].nnz == 2);
    CHECK(cands[3].nodes_with_neighbors == 1);
    CHECK(cands[3].max_neighborhood == 2);
    CHECK(cands[0].nodes_with_neighbors == 1);
  }
}
