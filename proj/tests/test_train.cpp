#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "vqc/errors.hpp"
#include "vqc/train.hpp"

using namespace vqc;
constexpr double pi = std::numbers::pi;

namespace {

ParamCircuit small_ansatz() {
    AnsatzSpec spec;
    spec.n_qubits = 3;
    spec.n_layers = 2;
    spec.encoding = AngleOnce{};
    return build_layered(spec); // 12 parameters
}

SplitSet small_friedman() {
    Dataset ds = gen_friedman(120, 0.0, 5);
    // 3-feature variant of the circuit: keep the first three features
    Dataset trimmed;
    trimmed.n_features = 3;
    trimmed.n_outputs = 1;
    for (int i = 0; i < ds.n_samples(); ++i) {
        const auto row = ds.row(i);
        trimmed.features.insert(trimmed.features.end(), row.begin(), row.begin() + 3);
        trimmed.targets.push_back(ds.target(i)[0]);
    }
    return split(trimmed, {}, 99);
}

TrainConfig base_config() {
    TrainConfig cfg;
    cfg.task = Task::Regression;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.01;
    cfg.optimizer = OptimKind::Adam;
    cfg.seed = 1234;
    return cfg;
}

std::uint64_t expected_gradient_evals(const TrainConfig& cfg, int n_train, int n_params) {
    std::uint64_t total = 0;
    GuidedSpsaSchedule schedule;
    const auto* guided = std::get_if<GuidedEstimator>(&cfg.estimator);
    if (guided) {
        schedule = make_schedule(n_params, guided->tau, cfg.epochs, guided->epsilon);
    }
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int start = 0; start < n_train; start += cfg.batch_size) {
            const int batch = std::min(cfg.batch_size, n_train - start);
            if (std::holds_alternative<ParamShiftEstimator>(cfg.estimator)) {
                total += std::uint64_t(batch) * 2 * n_params;
            } else if (const auto* spsa = std::get_if<SpsaEstimator>(&cfg.estimator)) {
                total += std::uint64_t(batch) * 2 * spsa->k;
            } else {
                const int n_ps = ps_partition_size(guided->tau, batch);
                total += std::uint64_t(n_ps) * 2 * n_params +
                         std::uint64_t(batch - n_ps) * 2 * schedule.k_at(epoch);
            }
        }
    }
    return total;
}

} // namespace

TEST_CASE("loss_and_error") {
    Dataset ds;
    ds.n_features = 1;
    ds.n_outputs = 1;
    ds.features = {0.0, 0.0};
    ds.targets = {0.5, -0.25};
    const std::vector<int> idx{0, 1};

    SUBCASE("perfect predictions give zero loss and zero errors") {
        const auto r = loss_and_error(Task::Regression, {{0.5}, {-0.25}}, ds, idx);
        CHECK(r.loss == 0.0);
        CHECK(r.errors[0][0] == 0.0);
        CHECK(r.errors[1][0] == 0.0);
    }
    SUBCASE("unit miss: MSE 1, raw error 2 scaled by 1/B") {
        Dataset one = ds;
        one.targets = {0.0, 0.0};
        const auto r = loss_and_error(Task::Regression, {{1.0}}, one, std::vector<int>{0});
        CHECK(r.loss == doctest::Approx(1.0));
        CHECK(r.errors[0][0] == doctest::Approx(2.0)); // batch of one
    }
    SUBCASE("sigmoid decode maps observable 0 to probability one half") {
        Dataset cls;
        cls.n_features = 1;
        cls.n_outputs = 3;
        cls.features = {0.0};
        cls.targets = {1.0, 0.0, 0.0};
        const auto r = loss_and_error(Task::Classification, {{0.0, 0.0, 0.0}}, cls,
                                      std::vector<int>{0});
        // errors (p - y)/B with p = 0.5
        CHECK(r.errors[0][0] == doctest::Approx(-0.5));
        CHECK(r.errors[0][1] == doctest::Approx(0.5));
        CHECK(r.errors[0][2] == doctest::Approx(0.5));
        CHECK(r.loss == doctest::Approx(-3.0 * std::log(0.5)));
    }
}

TEST_CASE("gradient counters match the closed form exactly") {
    const ParamCircuit qc = small_ansatz();
    const SplitSet data = small_friedman();
    const std::vector<PauliZObservable> obs{PauliZObservable::all(3)};
    const int n_train = data.train.n_samples();
    const int n_val = data.val.n_samples();
    const int n_test = data.test.n_samples();

    auto run_and_check = [&](TrainConfig cfg) {
        const TrainReport report = train(cfg, data, qc, obs);
        CHECK(report.totals.gradient == expected_gradient_evals(cfg, n_train, qc.n_params));
        CHECK(report.totals.forward == std::uint64_t(cfg.epochs) * n_train);
        CHECK(report.totals.validation == std::uint64_t(cfg.epochs) * n_val + n_test);
        for (std::size_t e = 1; e < report.counters.size(); ++e) {
            CHECK(report.counters[e].gradient >= report.counters[e - 1].gradient);
            CHECK(report.counters[e].forward >= report.counters[e - 1].forward);
        }
    };

    TrainConfig cfg = base_config();
    SUBCASE("parameter shift") {
        cfg.estimator = ParamShiftEstimator{};
        run_and_check(cfg);
    }
    SUBCASE("one epoch at full batch takes exactly one optimizer step") {
        cfg.estimator = ParamShiftEstimator{};
        cfg.epochs = 1;
        cfg.batch_size = n_train;
        cfg.record_step_params = true;
        const TrainReport report = train(cfg, data, qc, obs);
        CHECK(report.step_params.size() == 1);
        CHECK(report.totals.gradient == 2ULL * qc.n_params * n_train);
    }
    SUBCASE("SPSA-10") {
        cfg.estimator = SpsaEstimator{10, 0.05, false};
        run_and_check(cfg);
    }
    SUBCASE("guided tau 0.5") {
        cfg.estimator = GuidedEstimator{0.5, 1.0, 0.05};
        run_and_check(cfg);
    }
    SUBCASE("guided tau 0") {
        cfg.estimator = GuidedEstimator{0.0, 1.0, 0.05};
        run_and_check(cfg);
    }
}

TEST_CASE("tau = 1 reproduces the parameter-shift trajectory bitwise") {
    const ParamCircuit qc = small_ansatz();
    const SplitSet data = small_friedman();
    const std::vector<PauliZObservable> obs{PauliZObservable::all(3)};

    for (const bool shots : {false, true}) {
        TrainConfig cfg = base_config();
        cfg.record_step_params = true;
        if (shots) {
            cfg.mode = Shots{128};
        }

        cfg.estimator = ParamShiftEstimator{};
        const TrainReport baseline = train_baseline(cfg, data, qc, obs);

        cfg.estimator = GuidedEstimator{1.0, 1.0, 0.05};
        const TrainReport guided = train_guided(cfg, data, qc, obs);

        REQUIRE(baseline.step_params.size() == guided.step_params.size());
        for (std::size_t s = 0; s < baseline.step_params.size(); ++s) {
            CHECK(baseline.step_params[s] == guided.step_params[s]); // bitwise
        }
        CHECK(baseline.totals == guided.totals);
        CHECK(baseline.train_loss == guided.train_loss);
        CHECK(baseline.val_metric == guided.val_metric);
    }
}

TEST_CASE("assembled loss gradient matches finite differences of the batch loss") {
    const ParamCircuit qc = small_ansatz();
    const SplitSet data = small_friedman();
    const std::vector<PauliZObservable> obs{PauliZObservable::all(3)};
    const int batch = 8;
    std::vector<int> indices(batch);
    std::iota(indices.begin(), indices.end(), 0);

    RngStream rng(3);
    std::vector<double> params(qc.n_params);
    for (auto& p : params) {
        p = rng.uniform(0.0, pi);
    }

    Evaluator ev(qc, obs, Ideal{}, 0);
    auto batch_loss = [&](std::span<const double> theta) {
        std::vector<std::vector<double>> preds;
        for (int m : indices) {
            preds.push_back(ev.eval(data.train.row(m), theta));
        }
        return loss_and_error(Task::Regression, preds, data.train, indices).loss;
    };

    // chain-rule gradient
    std::vector<std::vector<double>> preds;
    for (int m : indices) {
        preds.push_back(ev.eval(data.train.row(m), params));
    }
    const LossResult loss = loss_and_error(Task::Regression, preds, data.train, indices);
    std::vector<double> grad(qc.n_params, 0.0);
    for (int m = 0; m < batch; ++m) {
        const Jacobian jac = param_shift_jacobian(ev, data.train.row(indices[m]), params).jacobian;
        for (int i = 0; i < qc.n_params; ++i) {
            grad[i] += jac.at(0, i) * loss.errors[m][0];
        }
    }

    // central differences of the scalar batch loss
    const double h = 1e-5;
    for (int i = 0; i < qc.n_params; ++i) {
        std::vector<double> shifted(params);
        shifted[i] += h;
        const double plus = batch_loss(shifted);
        shifted[i] = params[i] - h;
        const double minus = batch_loss(shifted);
        CHECK(std::abs(grad[i] - (plus - minus) / (2 * h)) < 1e-5);
    }
}

TEST_CASE("guided batches compose shift, suppression, and chain rule as documented") {
    // replay the first batch of a guided run by hand and match the engine bitwise
    const ParamCircuit qc = small_ansatz();
    const SplitSet data = small_friedman();
    const std::vector<PauliZObservable> obs{PauliZObservable::all(3)};

    TrainConfig cfg = base_config();
    cfg.epochs = 1;
    cfg.batch_size = 8;
    cfg.estimator = GuidedEstimator{0.5, 0.8, 0.05};
    cfg.record_step_params = true;
    const TrainReport report = train_guided(cfg, data, qc, obs);

    // manual replay
    const auto& guided = std::get<GuidedEstimator>(cfg.estimator);
    const auto schedule = make_schedule(qc.n_params, guided.tau, cfg.epochs, guided.epsilon);
    const int k0 = schedule.k_at(0);

    std::vector<double> params(qc.n_params, 0.0);
    {
        RngStream init = RngStream::derive(cfg.seed, kStreamInit, 0);
        for (auto& p : params) {
            p = init.uniform(0.0, pi);
        }
    }
    std::vector<int> order(data.train.n_samples());
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle_rng = RngStream::derive(cfg.seed, kStreamShuffle, 0);
    shuffle(order, shuffle_rng);

    Evaluator ev(qc, obs, cfg.mode, cfg.seed);
    const int batch = cfg.batch_size;
    const std::span<const int> indices(order.data(), batch);
    std::vector<std::vector<double>> preds;
    const std::uint64_t fwd = ev.reserve(batch);
    for (int m = 0; m < batch; ++m) {
        preds.push_back(ev.eval_at(fwd + m, data.train.row(indices[m]), params));
    }
    const LossResult loss = loss_and_error(cfg.task, preds, data.train, indices);

    const int n_ps = ps_partition_size(guided.tau, batch);
    REQUIRE(n_ps == 4);
    std::vector<Jacobian> jacobians;
    std::uint64_t spsa_ordinal = 0;
    for (int m = 0; m < batch; ++m) {
        if (m < n_ps) {
            jacobians.push_back(
                param_shift_jacobian(ev, data.train.row(indices[m]), params).jacobian);
        } else {
            RngStream dir = RngStream::derive(cfg.seed, kStreamSpsaDirections, spsa_ordinal++);
            jacobians.push_back(spsa_jacobian(ev, data.train.row(indices[m]), params,
                                              SpsaConfig{k0, guided.c, false}, dir)
                                    .jacobian);
        }
    }
    const std::vector<double> sigma = avg_ps_norm(std::span(jacobians.data(), n_ps));
    for (int m = n_ps; m < batch; ++m) {
        jacobians[m] = suppress(jacobians[m], sigma, guided.epsilon);
        // row-norm law: suppressed rows enter the optimizer at epsilon * sigma
        CHECK(std::abs(jacobians[m].row_norm(0) - guided.epsilon * sigma[0]) < 1e-12);
    }
    std::vector<double> grad(qc.n_params, 0.0);
    for (int m = 0; m < batch; ++m) {
        for (int i = 0; i < qc.n_params; ++i) {
            grad[i] += jacobians[m].at(0, i) * loss.errors[m][0];
        }
    }
    Optimizer opt(cfg.optimizer, cfg.learning_rate, qc.n_params, cfg.hyper);
    opt.step(params, grad);

    CHECK(params == report.step_params[0]); // bitwise agreement with the engine
}

TEST_CASE("identical config and seed give identical reports") {
    const ParamCircuit qc = small_ansatz();
    const SplitSet data = small_friedman();
    const std::vector<PauliZObservable> obs{PauliZObservable::all(3)};

    for (const int mode : {0, 1, 2}) {
        TrainConfig cfg = base_config();
        cfg.estimator = GuidedEstimator{0.5, 1.0, 0.05};
        if (mode == 1) {
            cfg.mode = Shots{64};
        } else if (mode == 2) {
            cfg.epochs = 1;
            cfg.mode = Noisy{NoiseModel{0.002, 0.01, 0.01}, 64};
        }
        const TrainReport a = train(cfg, data, qc, obs);
        const TrainReport b = train(cfg, data, qc, obs);
        CHECK(a.train_loss == b.train_loss);
        CHECK(a.val_metric == b.val_metric);
        CHECK(a.final_params == b.final_params);
        CHECK(a.totals == b.totals);
        CHECK(a.test_metric == b.test_metric);
    }
}

TEST_CASE("worker count does not change results") {
    const ParamCircuit qc = small_ansatz();
    const SplitSet data = small_friedman();
    const std::vector<PauliZObservable> obs{PauliZObservable::all(3)};

    TrainConfig cfg = base_config();
    cfg.epochs = 1;
    cfg.estimator = GuidedEstimator{0.5, 1.0, 0.05};
    cfg.mode = Shots{64};
    cfg.workers = 1;
    const TrainReport serial = train(cfg, data, qc, obs);
    cfg.workers = 3;
    const TrainReport parallel = train(cfg, data, qc, obs);
    CHECK(serial.final_params == parallel.final_params);
    CHECK(serial.train_loss == parallel.train_loss);
    CHECK(serial.totals == parallel.totals);
}

TEST_CASE("histograms") {
    SUBCASE("all-zero gradients land in the single central bin") {
        GradientHistogram h;
        h.add_all(std::vector<double>(100, 0.0));
        CHECK(h.total == 100);
        CHECK(h.central_fraction() == 1.0);
    }
    SUBCASE("binning covers [-0.5, 0.5] with outlier bins") {
        GradientHistogram h;
        h.add(-0.6);
        h.add(0.6);
        h.add(0.4999);
        h.add(-0.5);
        CHECK(h.counts[0] == 1);
        CHECK(h.counts[GradientHistogram::kBins + 1] == 1);
        CHECK(h.total == 4);
    }
    SUBCASE("uncaptured epochs raise a lookup error") {
        const ParamCircuit qc = small_ansatz();
        const SplitSet data = small_friedman();
        const std::vector<PauliZObservable> obs{PauliZObservable::all(3)};
        TrainConfig cfg = base_config();
        cfg.epochs = 1;
        cfg.estimator = ParamShiftEstimator{};
        cfg.histogram_epochs = {0};
        const TrainReport report = train(cfg, data, qc, obs);
        CHECK(gradient_histogram(report, 0).total > 0);
        CHECK_THROWS_AS(gradient_histogram(report, 1), std::out_of_range);
    }
}

TEST_CASE("toy loss fixtures from a brute-force scan") {
    CHECK(toy_loss(0.0) == 0.0);

    // 10^6-point grid over [-pi, pi]
    const int n = 1000000;
    double best = 1e9, best_x = 0.0;
    std::vector<std::pair<double, double>> minima; // (value, x) of grid-local minima
    double prev2 = toy_loss(-pi), prev1 = toy_loss(-pi + 2 * pi / n);
    for (int i = 2; i <= n; ++i) {
        const double x = -pi + 2 * pi * i / n;
        const double v = toy_loss(x);
        if (prev1 < prev2 && prev1 <= v) {
            minima.emplace_back(prev1, x - 2 * pi / n);
        }
        if (v < best) {
            best = v;
            best_x = x;
        }
        prev2 = prev1;
        prev1 = v;
    }
    std::sort(minima.begin(), minima.end());

    // frozen fixtures
    CHECK(best == doctest::Approx(-1.8833112394).epsilon(1e-8));
    CHECK(best_x == doctest::Approx(-2.1684592).epsilon(1e-5));
    REQUIRE(minima.size() >= 2);
    CHECK(minima[0].first == doctest::Approx(-1.8833112394).epsilon(1e-8));
    CHECK(minima[1].first == doctest::Approx(-1.7732586823).epsilon(1e-8)); // best local plateau
    CHECK(minima[1].second == doctest::Approx(-1.7719896).epsilon(1e-4));
}

TEST_CASE("toy runs descend and stay deterministic") {
    AnsatzSpec spec;
    spec.n_qubits = 4;
    spec.n_layers = 5;
    spec.encoding = NoEncoding{};
    const ParamCircuit qc = build_layered(spec);

    TrainConfig cfg;
    cfg.task = Task::Toy;
    cfg.estimator = ParamShiftEstimator{};
    cfg.epochs = 60;
    cfg.learning_rate = 0.01;
    cfg.optimizer = OptimKind::Adam;
    cfg.seed = 2;

    const ToyResult a = toy_minimize(cfg, qc);
    const ToyResult b = toy_minimize(cfg, qc);
    REQUIRE(a.trajectory.size() == 61);
    for (std::size_t s = 0; s < a.trajectory.size(); ++s) {
        CHECK(a.trajectory[s].step == static_cast<int>(s));
        CHECK(a.trajectory[s].x == b.trajectory[s].x);
    }
    CHECK(a.trajectory.back().loss < a.trajectory.front().loss);
    CHECK(a.totals.gradient == 60ULL * 2 * qc.n_params);
    CHECK(a.totals.forward == 61);

    // encoding layers are rejected
    AnsatzSpec bad = spec;
    bad.encoding = AngleOnce{};
    const ParamCircuit with_inputs = build_layered(bad);
    CHECK_THROWS_AS(toy_minimize(cfg, with_inputs), ConfigError);
}

TEST_CASE("training rejects broken configurations") {
    const ParamCircuit qc = small_ansatz();
    const SplitSet data = small_friedman();
    const std::vector<PauliZObservable> obs{PauliZObservable::all(3)};

    TrainConfig cfg = base_config();
    cfg.estimator = GuidedEstimator{0.5, 1.0, 0.05};
    CHECK_THROWS_AS(train_baseline(cfg, data, qc, obs), ConfigError);
    cfg.estimator = ParamShiftEstimator{};
    CHECK_THROWS_AS(train_guided(cfg, data, qc, obs), ConfigError);

    cfg.epochs = 0;
    CHECK_THROWS_AS(train(cfg, data, qc, obs), ConfigError);
}
