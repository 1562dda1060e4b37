#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "hfedsn/orchestrator.hpp"

using namespace hfedsn;

namespace {

struct Corpus {
    LabeledDataset train;
    LabeledDataset test;
};

Corpus tiny_corpus() {
    return {synthetic_blobs(2, Shape{1, 2, 2}, 15, 0.3, 21),
            synthetic_blobs(2, Shape{1, 2, 2}, 5, 0.3, 22)};
}

RunConfig tiny_config(Algorithm algorithm) {
    RunConfig cfg;
    cfg.algorithm = algorithm;
    cfg.topology = "E2C5";
    cfg.arch = ArchVariant::Mlp;
    cfg.rounds = 2;
    cfg.tau = 1;
    cfg.eta = 1.0;
    cfg.batch_size = 8;
    cfg.labels_per_client = 1;
    cfg.seed = 3;
    return cfg;
}

bool same_record(const LinkRecord& a, const LinkRecord& b) {
    return a.round == b.round && a.src == b.src && a.dst == b.dst && a.kind == b.kind &&
           a.elements == b.elements && a.bits == b.bits;
}

bool same_report(const TrainingReport& a, const TrainingReport& b) {
    if (a.final_accuracy != b.final_accuracy) return false;
    if (a.rounds.size() != b.rounds.size()) return false;
    for (std::size_t t = 0; t < a.rounds.size(); ++t) {
        if (a.rounds[t].client_loss != b.rounds[t].client_loss) return false;
        if (a.rounds[t].client_accuracy != b.rounds[t].client_accuracy) return false;
        if (a.rounds[t].round_kb != b.rounds[t].round_kb) return false;
    }
    if (a.meter.records().size() != b.meter.records().size()) return false;
    for (std::size_t i = 0; i < a.meter.records().size(); ++i) {
        if (!same_record(a.meter.records()[i], b.meter.records()[i])) return false;
    }
    return true;
}

// Scoped override of HFEDSN_WORKERS.
class WorkerEnv {
  public:
    explicit WorkerEnv(const char* value) {
        const char* old = std::getenv("HFEDSN_WORKERS");
        if (old != nullptr) saved_ = old;
        had_ = old != nullptr;
        if (value != nullptr) {
            setenv("HFEDSN_WORKERS", value, 1);
        } else {
            unsetenv("HFEDSN_WORKERS");
        }
    }
    ~WorkerEnv() {
        if (had_) {
            setenv("HFEDSN_WORKERS", saved_.c_str(), 1);
        } else {
            unsetenv("HFEDSN_WORKERS");
        }
    }

  private:
    std::string saved_;
    bool had_ = false;
};

}  // namespace

TEST_SUITE("orchestrator") {

TEST_CASE("mask flow produces the expected link records") {
    Corpus data = tiny_corpus();
    RunConfig cfg = tiny_config(Algorithm::HFedSn);
    TrainingReport report = run_training(cfg, data.train, data.test);

    CHECK(report.num_clients == 5);
    CHECK(report.num_edges == 2);
    CHECK(report.total_params == 4610);
    CHECK(report.shared_params == 4480);
    REQUIRE(report.rounds.size() == 2);

    // per round: one mask up per client, one per edge, one broadcast row
    REQUIRE(report.meter.records().size() == 2 * (5 + 2 + 1));
    for (int t = 1; t <= 2; ++t) {
        int shared = 0, edge = 0, theta = 0;
        for (const LinkRecord& r : report.meter.records()) {
            if (r.round != t) continue;
            CHECK(r.elements == report.shared_params);
            switch (r.kind) {
                case PayloadKind::SharedMask:
                    ++shared;
                    CHECK(r.src.starts_with("client"));
                    CHECK(r.dst.starts_with("edge"));
                    CHECK(r.bits == r.elements);
                    break;
                case PayloadKind::EdgeMask:
                    ++edge;
                    CHECK(r.dst == "cloud");
                    CHECK(r.bits == r.elements);
                    break;
                case PayloadKind::GlobalTheta:
                    ++theta;
                    CHECK(r.src == "cloud");
                    CHECK(r.dst == "clients");
                    break;
                default:
                    FAIL("unexpected payload kind");
            }
        }
        CHECK(shared == 5);
        CHECK(edge == 2);
        CHECK(theta == 1);
    }

    for (const RoundReport& r : report.rounds) {
        CHECK(r.client_loss.size() == 5);
        CHECK(r.client_accuracy.size() == 5);
        CHECK(r.round_kb > 0.0);
        for (double loss : r.client_loss) CHECK(std::isfinite(loss));
    }
    CHECK(report.final_accuracy.size() == 5);

    double summed = 0.0;
    for (const RoundReport& r : report.rounds) summed += r.round_kb;
    CHECK(summed == doctest::Approx(report.meter.grand_total().total_kb).epsilon(1e-12));
}

TEST_CASE("physical accounting fans the broadcast out per client") {
    Corpus data = tiny_corpus();
    RunConfig cfg = tiny_config(Algorithm::HFedSn);
    cfg.rounds = 1;
    cfg.cost_mode = AccountingMode::Physical;
    TrainingReport report = run_training(cfg, data.train, data.test);

    int theta_rows = 0;
    for (const LinkRecord& r : report.meter.records()) {
        if (r.kind != PayloadKind::GlobalTheta) continue;
        ++theta_rows;
        CHECK(r.dst.starts_with("client"));
        CHECK(r.bits == 32 * r.elements);
    }
    CHECK(theta_rows == 5);
    CHECK(report.meter.records().size() == 5 + 2 + 5);
}

TEST_CASE("rerunning the same config replays every number") {
    Corpus data = tiny_corpus();
    for (Algorithm algorithm :
         {Algorithm::HFedSn, Algorithm::HierFavg, Algorithm::Topk}) {
        CAPTURE(to_string(algorithm));
        RunConfig cfg = tiny_config(algorithm);
        TrainingReport a = run_training(cfg, data.train, data.test);
        TrainingReport b = run_training(cfg, data.train, data.test);
        CHECK(same_report(a, b));
    }
}

TEST_CASE("results do not depend on the worker count") {
    Corpus data = tiny_corpus();
    RunConfig cfg = tiny_config(Algorithm::HFedSn);
    TrainingReport serial = [&] {
        WorkerEnv env("1");
        return run_training(cfg, data.train, data.test);
    }();
    TrainingReport threaded = [&] {
        WorkerEnv env("4");
        return run_training(cfg, data.train, data.test);
    }();
    CHECK(same_report(serial, threaded));
}

TEST_CASE("worker count env handling") {
    {
        WorkerEnv env("5");
        CHECK(worker_count() == 5);
    }
    {
        WorkerEnv env("0");
        CHECK(worker_count() >= 1);
    }
    {
        WorkerEnv env("soon");
        CHECK(worker_count() >= 1);
    }
    {
        WorkerEnv env(nullptr);
        CHECK(worker_count() >= 1);
    }
}

TEST_CASE("final-only evaluation skips the per-round pass") {
    Corpus data = tiny_corpus();
    RunConfig cfg = tiny_config(Algorithm::HFedSn);
    cfg.eval_mode = EvalMode::FinalOnly;
    TrainingReport report = run_training(cfg, data.train, data.test);
    for (const RoundReport& r : report.rounds) {
        CHECK(r.client_accuracy.empty());
        CHECK(r.client_loss.size() == 5);
    }
    CHECK(report.final_accuracy.size() == 5);
}

TEST_CASE("dense baseline ships full weight vectors") {
    Corpus data = tiny_corpus();
    RunConfig cfg = tiny_config(Algorithm::HierFavg);
    cfg.rounds = 1;
    TrainingReport report = run_training(cfg, data.train, data.test);

    REQUIRE(report.meter.records().size() == 5 + 2 + 1);
    for (const LinkRecord& r : report.meter.records()) {
        CHECK(r.kind == PayloadKind::DenseWeights);
        CHECK(r.elements == report.total_params);
        CHECK(r.bits == 32 * r.elements);
    }
}

TEST_CASE("sparse baseline uplinks exactly k elements") {
    Corpus data = tiny_corpus();
    RunConfig cfg = tiny_config(Algorithm::Topk);
    cfg.rounds = 1;
    cfg.topk_fraction = 0.03125;
    TrainingReport report = run_training(cfg, data.train, data.test);

    const auto k = static_cast<std::uint64_t>(
        std::ceil(cfg.topk_fraction * static_cast<double>(report.total_params)));
    int uplinks = 0, broadcasts = 0;
    for (const LinkRecord& r : report.meter.records()) {
        if (r.kind == PayloadKind::TopkUpdate) {
            ++uplinks;
            CHECK(r.elements == k);
        } else {
            REQUIRE(r.kind == PayloadKind::DenseWeights);
            ++broadcasts;
            CHECK(r.elements == report.total_params);
        }
    }
    CHECK(uplinks == 5 + 2);
    CHECK(broadcasts == 1);
}

TEST_CASE("invalid round counts are rejected") {
    Corpus data = tiny_corpus();
    RunConfig cfg = tiny_config(Algorithm::HFedSn);
    cfg.rounds = 0;
    CHECK_THROWS_AS(run_training(cfg, data.train, data.test), std::invalid_argument);
    cfg.rounds = 1;
    cfg.tau = -1;
    CHECK_THROWS_AS(run_training(cfg, data.train, data.test), std::invalid_argument);
}

}  // TEST_SUITE
