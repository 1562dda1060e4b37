#include <doctest.h>

#include <cmath>
#include <memory>
#include <numeric>

#include "hfedsn/baselines.hpp"
#include "hfedsn/parameter_vector.hpp"
#include "hfedsn/rng.hpp"
#include "test_support.hpp"

using namespace hfedsn;
using test_support::make_dense_arch;

namespace {

std::shared_ptr<const LabeledDataset> tiny_data(std::uint64_t seed) {
    return std::make_shared<const LabeledDataset>(
        synthetic_blobs(2, Shape{1, 1, 2}, 12, 0.3, seed));
}

DenseClientState make_dense(int id, int edge, const ArchitectureSpec& arch,
                            std::shared_ptr<const LabeledDataset> data,
                            std::vector<std::size_t> train, std::uint64_t seed, int tau,
                            double eta = 0.001) {
    DenseClientState s;
    s.client_id = id;
    s.edge_id = edge;
    s.weights.assign(arch.param_count, 0.0);
    s.dataset = std::move(data);
    s.train_indices = std::move(train);
    s.rng_seed = seed;
    s.hyper.tau = tau;
    s.hyper.eta = eta;
    s.hyper.batch_size = 4;
    return s;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("weighted average arithmetic") {
    std::vector<std::vector<double>> vecs = {{1.0, 2.0}, {3.0, 6.0}};
    std::vector<double> equal = weighted_average(vecs, {1.0, 1.0});
    CHECK(equal == std::vector<double>{2.0, 4.0});

    vecs.push_back({5.0, 10.0});
    std::vector<double> counts = weighted_average(vecs, {1.0, 1.0, 2.0});
    CHECK(counts[0] == doctest::Approx((1.0 + 3.0 + 2 * 5.0) / 4.0).epsilon(1e-15));
    CHECK(counts[1] == doctest::Approx((2.0 + 6.0 + 2 * 10.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("weighted average validation") {
    CHECK_THROWS_AS(weighted_average({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_average({{1.0}}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_average({{1.0}, {2.0}}, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_average({{1.0}, {2.0, 3.0}}, {1.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("dense training without epochs is a no-op") {
    ArchitectureSpec arch = make_dense_arch(Shape{1, 1, 2}, {3}, 2);
    auto data = tiny_data(1);
    std::vector<std::size_t> idx(data->size());
    std::iota(idx.begin(), idx.end(), 0);
    DenseClientState c = make_dense(0, 0, arch, data, idx, 7, /*tau=*/0);
    std::vector<double> before = c.weights;
    std::vector<double> losses = dense_local_train(c, arch, 1);
    CHECK(losses.empty());
    CHECK(c.weights == before);
}

TEST_CASE("dense training replays by seed and lowers the loss") {
    ArchitectureSpec arch = make_dense_arch(Shape{1, 1, 2}, {8}, 2);
    auto data = tiny_data(2);
    std::vector<std::size_t> idx(data->size());
    std::iota(idx.begin(), idx.end(), 0);

    DenseClientState a = make_dense(0, 0, arch, data, idx, 7, /*tau=*/4, /*eta=*/0.2);
    DenseClientState b = make_dense(0, 0, arch, data, idx, 7, /*tau=*/4, /*eta=*/0.2);
    Rng init(9);
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        a.weights[i] = b.weights[i] = init.normal(0.0, 0.5);
    }
    std::vector<double> la = dense_local_train(a, arch, 1);
    std::vector<double> lb = dense_local_train(b, arch, 1);
    CHECK(la == lb);
    CHECK(a.weights == b.weights);
    CHECK(la.back() < la.front());
}

TEST_CASE("one-client hierarchy is a fixed point under no training") {
    ArchitectureSpec arch = make_dense_arch(Shape{1, 1, 2}, {3}, 2);
    auto data = tiny_data(3);
    Topology topo;
    topo.num_edges = 1;
    topo.clients_per_edge = {{0}};
    topo.edge_of_client = {0};
    std::vector<DenseClientState> clients = {
        make_dense(0, 0, arch, data, {0, 1, 2, 3}, 5, /*tau=*/0)};

    std::vector<double> global(arch.param_count);
    Rng rng(4);
    for (double& w : global) w = rng.normal();
    std::vector<double> next = hierfavg_round(clients, topo, arch, global, 1);
    CHECK(next == global);
}

TEST_CASE("hierarchical averaging equals the flat weighted mean") {
    ArchitectureSpec arch = make_dense_arch(Shape{1, 1, 2}, {4}, 2);
    auto data = tiny_data(4);

    Topology topo;
    topo.num_edges = 2;
    topo.clients_per_edge = {{0, 1}, {2}};
    topo.edge_of_client = {0, 0, 1};

    auto build = [&](int id, int edge, std::vector<std::size_t> train) {
        return make_dense(id, edge, arch, data, std::move(train), 100 + id, /*tau=*/1,
                          /*eta=*/0.05);
    };
    std::vector<DenseClientState> clients = {build(0, 0, {0, 1, 2}),
                                             build(1, 0, {3, 4, 5, 6, 7}),
                                             build(2, 1, {8, 9, 10, 11, 12, 13})};

    std::vector<double> global(arch.param_count);
    Rng rng(6);
    for (double& w : global) w = rng.normal(0.0, 0.4);
    std::vector<double> hierarchical = hierfavg_round(clients, topo, arch, global, 1);

    // flat oracle: replay the same local training, then average once
    std::vector<std::vector<double>> trained;
    std::vector<double> counts;
    for (int id = 0; id < 3; ++id) {
        DenseClientState replica = build(id, topo.edge_of_client[id],
                                         clients[id].train_indices);
        replica.weights = global;
        dense_local_train(replica, arch, 1);
        trained.push_back(replica.weights);
        counts.push_back(static_cast<double>(replica.train_indices.size()));
    }
    std::vector<double> flat = weighted_average(trained, counts);
    REQUIRE(hierarchical.size() == flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        CHECK(hierarchical[i] == doctest::Approx(flat[i]).epsilon(1e-12));
    }
}

TEST_CASE("topk keeps the largest magnitudes") {
    std::vector<double> delta = {3.0, -5.0, 2.0, -1.0};
    SparseUpdate u = topk_sparsify(delta, 0.25);
    REQUIRE(u.size() == 1);
    CHECK(u.indices[0] == 1);
    CHECK(u.values[0] == -5.0);
}

TEST_CASE("topk with full fraction is the identity") {
    std::vector<double> delta = {0.5, -0.25, 0.0, 2.0};
    SparseUpdate u = topk_sparsify(delta, 1.0);
    CHECK(u.indices == std::vector<std::uint32_t>{0, 1, 2, 3});
    CHECK(u.values == delta);
}

TEST_CASE("topk ties go to the lower index") {
    std::vector<double> delta = {2.0, -2.0, 1.0};
    SparseUpdate one = topk_sparsify(delta, 0.05);  // k = 1
    CHECK(one.indices == std::vector<std::uint32_t>{0});

    SparseUpdate two = topk_sparsify(delta, 0.4);  // k = 2
    CHECK(two.indices == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("topk agrees with a full-sort oracle") {
    Rng rng(40);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 5 + rng.uniform_index(60);
        std::vector<double> delta(d);
        for (double& v : delta) {
            // coarse grid provokes magnitude ties
            v = (static_cast<double>(rng.uniform_index(9)) - 4.0) / 4.0;
        }
        const double fraction = 0.05 + 0.9 * rng.uniform();
        SparseUpdate got = topk_sparsify(delta, fraction);

        std::vector<std::uint32_t> order(d);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return std::abs(delta[a]) > std::abs(delta[b]);
        });
        const std::size_t k = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(d)));
        order.resize(std::min(k, d));
        std::sort(order.begin(), order.end());

        CHECK(got.indices == order);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got.values[i] == delta[got.indices[i]]);
        }
    }
}

TEST_CASE("densify scatters and validates") {
    SparseUpdate u;
    u.indices = {1, 3};
    u.values = {-2.0, 7.0};
    CHECK(densify(u, 5) == std::vector<double>{0.0, -2.0, 0.0, 7.0, 0.0});
    CHECK_THROWS_AS(densify(u, 3), std::invalid_argument);
}

TEST_CASE("topk fraction validation") {
    std::vector<double> delta = {1.0, 2.0};
    CHECK_THROWS_AS(topk_sparsify(delta, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(topk_sparsify(delta, 1.5), std::invalid_argument);
}

}  // TEST_SUITE
