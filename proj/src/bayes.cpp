#include "bhtomo/bayes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "bhtomo/errors.hpp"
#include "bhtomo/hashing.hpp"
#include "bhtomo/parallel.hpp"

namespace bhtomo {

GroupSchedule default_group_schedule(const LatticeGeometry& geometry) {
    const int L = geometry.cols();
    const int n_legs = L - 1;
    GroupSchedule s;

    // bond order: top legs [0, L-1), bottom legs [L-1, 2L-2), rungs [2L-2, 3L-2)
    ParamGroup top{"J_top", {}};
    for (int b = 0; b < n_legs; ++b) top.members.push_back({ParamRef::Kind::J, b});
    top.members.push_back({ParamRef::Kind::J, 2 * n_legs});  // rung (1, L+1)
    s.groups.push_back(top);

    ParamGroup bottom{"J_bottom", {}};
    for (int b = n_legs; b < 2 * n_legs; ++b) bottom.members.push_back({ParamRef::Kind::J, b});
    bottom.members.push_back({ParamRef::Kind::J, 3 * L - 3});  // rung (L, 2L)
    s.groups.push_back(bottom);

    ParamGroup rungs{"J_rungs", {}};
    for (int b = 2 * n_legs + 1; b < 3 * L - 3; ++b) {
        rungs.members.push_back({ParamRef::Kind::J, b});
    }
    if (!rungs.members.empty()) s.groups.push_back(rungs);  // L = 2 has no interior rungs

    // U pairs: (1,2), (2,3), ..., (2L-1, 2L), plus (1, L+1)
    for (int i = 0; i + 1 < geometry.n_sites(); ++i) {
        ParamGroup g{"U_" + std::to_string(i + 1) + "_" + std::to_string(i + 2),
                     {{ParamRef::Kind::U, i}, {ParamRef::Kind::U, i + 1}}};
        s.groups.push_back(g);
    }
    s.groups.push_back(
        {"U_1_" + std::to_string(L + 1), {{ParamRef::Kind::U, 0}, {ParamRef::Kind::U, L}}});
    return s;
}

CandidateGrid CandidateGrid::from_prior(const PriorBox& prior, int n_J, int n_U) {
    if (n_J < 1 || n_U < 1) throw ConfigError("bayes: candidate counts must be >= 1");
    CandidateGrid grid;
    auto fill = [](double center, double hw, int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        if (n == 1) {
            v[0] = center;
            return v;
        }
        for (int k = 0; k < n; ++k) {
            v[static_cast<std::size_t>(k)] =
                center - hw + 2.0 * hw * static_cast<double>(k) / static_cast<double>(n - 1);
        }
        return v;
    };
    for (std::size_t b = 0; b < prior.J_center.size(); ++b) {
        grid.J.push_back(fill(prior.J_center[b], prior.J_half_width[b], n_J));
    }
    for (std::size_t i = 0; i < prior.U_center.size(); ++i) {
        grid.U.push_back(fill(prior.U_center[i], prior.U_half_width[i], n_U));
    }
    return grid;
}

double CandidateGrid::J_spacing(int bond) const {
    const auto& c = J.at(static_cast<std::size_t>(bond));
    if (c.size() < 2) return 0.0;
    return c[1] - c[0];
}

Eigen::VectorXd log_outcome_probabilities(const LatticeGeometry& geometry, const FockBasis& basis,
                                          const ParameterSet& params,
                                          const QuenchConfig& quench) {
    auto H = build_hamiltonian(geometry, basis, params);
    auto p = outcome_distribution(evolve(H, basis, quench));
    Eigen::VectorXd logp(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        logp(k) = std::log(std::max(p(k), kLikelihoodFloor));
    }
    return logp;
}

std::optional<Eigen::VectorXd> LogProbCache::get(std::uint64_t key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

void LogProbCache::put(std::uint64_t key, Eigen::VectorXd value) {
    std::lock_guard<std::mutex> lock(mutex_);
    map_.emplace(key, std::move(value));
}

std::size_t LogProbCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.size();
}

std::uint64_t parameter_key(const ParameterSet& params) {
    Fnv1a64 h;
    auto update = [&h](const std::vector<double>& v) {
        h.update(v.data(), v.size() * sizeof(double));
    };
    update(params.J);
    update(params.U);
    update(params.mu);
    return h.value();
}

std::vector<std::vector<double>> enumerate_combos(const ParamGroup& group,
                                                  const CandidateGrid& grid) {
    std::vector<const std::vector<double>*> lists;
    for (const ParamRef& ref : group.members) {
        if (ref.kind == ParamRef::Kind::J) {
            lists.push_back(&grid.J.at(static_cast<std::size_t>(ref.index)));
        } else {
            lists.push_back(&grid.U.at(static_cast<std::size_t>(ref.index)));
        }
    }
    std::size_t total = 1;
    for (const auto* l : lists) total *= l->size();

    std::vector<std::vector<double>> combos;
    combos.reserve(total);
    std::vector<double> current(lists.size());
    auto rec = [&](auto&& self, std::size_t pos) -> void {
        if (pos == lists.size()) {
            combos.push_back(current);
            return;
        }
        for (double v : *lists[pos]) {
            current[pos] = v;
            self(self, pos + 1);
        }
    };
    rec(rec, 0);
    return combos;
}

ParameterSet apply_combo(const ParameterSet& base, const ParamGroup& group,
                         const std::vector<double>& values) {
    if (values.size() != group.members.size()) {
        throw ConfigError("bayes: combo size does not match group");
    }
    ParameterSet out = base;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const ParamRef& ref = group.members[i];
        if (ref.kind == ParamRef::Kind::J) {
            out.J.at(static_cast<std::size_t>(ref.index)) = values[i];
        } else {
            out.U.at(static_cast<std::size_t>(ref.index)) = values[i];
        }
    }
    return out;
}

namespace {

// log-sum-exp normalization of the posterior over combos
void normalize_posterior(PosteriorGrid& grid) {
    double max_log = *std::max_element(grid.log_likelihood.begin(), grid.log_likelihood.end());
    grid.posterior.resize(grid.log_likelihood.size());
    double total = 0.0;
    for (std::size_t i = 0; i < grid.log_likelihood.size(); ++i) {
        grid.posterior[i] = std::exp(grid.log_likelihood[i] - max_log);
        total += grid.posterior[i];
    }
    for (double& p : grid.posterior) p /= total;
    grid.argmax = static_cast<std::size_t>(std::distance(
        grid.log_likelihood.begin(),
        std::max_element(grid.log_likelihood.begin(), grid.log_likelihood.end())));
}

}  // namespace

PosteriorGrid group_log_likelihood(const LatticeGeometry& geometry, const FockBasis& basis,
                                   const SnapshotSet& shots, const BayesState& state,
                                   const ParamGroup& group, const CandidateGrid& grid,
                                   const QuenchConfig& quench, int n_threads,
                                   LogProbCache* shared_cache) {
    PosteriorGrid out;
    out.group = group;
    out.combos = enumerate_combos(group, grid);
    out.log_likelihood.resize(out.combos.size());

    Eigen::VectorXd hist = snapshot_histogram(shots, basis);

    parallel_for(out.combos.size(), n_threads, [&](std::size_t i) {
        ParameterSet candidate = apply_combo(state.params, group, out.combos[i]);
        Eigen::VectorXd logp;
        if (shared_cache != nullptr) {
            std::uint64_t key = parameter_key(candidate);
            if (auto cached = shared_cache->get(key)) {
                logp = std::move(*cached);
            } else {
                logp = log_outcome_probabilities(geometry, basis, candidate, quench);
                shared_cache->put(key, logp);
            }
        } else {
            logp = log_outcome_probabilities(geometry, basis, candidate, quench);
        }
        out.log_likelihood[i] = hist.dot(logp);
    });

    normalize_posterior(out);
    return out;
}

BayesRunResult run_estimation(const LatticeGeometry& geometry, const FockBasis& basis,
                              const SnapshotSet& shots, const CandidateGrid& grid,
                              const GroupSchedule& schedule, const PriorBox& prior,
                              const QuenchConfig& quench, int n_threads,
                              double wall_clock_budget_seconds) {
    if (grid.J.size() != static_cast<std::size_t>(geometry.n_bonds()) ||
        grid.U.size() != static_cast<std::size_t>(geometry.n_sites())) {
        throw ConfigError("bayes: candidate grid does not cover all J and U");
    }
    const auto start = std::chrono::steady_clock::now();

    BayesRunResult result;
    result.final_state.params = prior.centers();  // mu stays here throughout
    result.final_state.iteration = 0;

    Eigen::VectorXd hist = snapshot_histogram(shots, basis);
    // Within one run the histogram is fixed, so the scalar log-likelihood can
    // be memoized by the full parameter assignment; converged iterations
    // re-evaluate the same candidates at no eigendecomposition cost.
    std::unordered_map<std::uint64_t, double> memo;
    std::mutex memo_mutex;

    for (int it = 0; it < schedule.n_iterations; ++it) {
        for (const ParamGroup& group : schedule.groups) {
            if (wall_clock_budget_seconds > 0.0) {
                double elapsed = std::chrono::duration<double>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();
                if (elapsed > wall_clock_budget_seconds) {
                    result.aborted_on_budget = true;
                    return result;
                }
            }

            auto combos = enumerate_combos(group, grid);
            std::vector<double> logL(combos.size());
            parallel_for(combos.size(), n_threads, [&](std::size_t i) {
                ParameterSet candidate =
                    apply_combo(result.final_state.params, group, combos[i]);
                std::uint64_t key = parameter_key(candidate);
                {
                    std::lock_guard<std::mutex> lock(memo_mutex);
                    auto found = memo.find(key);
                    if (found != memo.end()) {
                        logL[i] = found->second;
                        return;
                    }
                }
                Eigen::VectorXd logp =
                    log_outcome_probabilities(geometry, basis, candidate, quench);
                double value = hist.dot(logp);
                logL[i] = value;
                std::lock_guard<std::mutex> lock(memo_mutex);
                memo.emplace(key, value);
            });

            std::size_t best = static_cast<std::size_t>(
                std::distance(logL.begin(), std::max_element(logL.begin(), logL.end())));
            result.final_state.params =
                apply_combo(result.final_state.params, group, combos[best]);
            result.history.push_back({it, group.name, combos[best], logL[best]});
        }
        result.final_state.iteration = it + 1;
    }
    return result;
}

ComparisonResult compare_estimators(const LatticeGeometry& geometry, const FockBasis& basis,
                                    const std::vector<const EstimatorSuite*>& suites,
                                    const PriorBox& prior, const QuenchConfig& quench,
                                    const ComparisonProtocol& protocol, int n_threads) {
    if (suites.size() != protocol.snapshot_counts.size()) {
        throw ConfigError("compare: need one suite per snapshot count");
    }
    CandidateGrid grid =
        CandidateGrid::from_prior(prior, protocol.schedule.n_J_candidates,
                                  protocol.schedule.n_U_candidates);

    // Names of the compared parameters, in schedule order.
    ComparisonResult result;
    std::vector<std::pair<char, int>> compared;  // (kind, index)
    for (const auto& group : protocol.schedule.groups) {
        for (const auto& ref : group.members) {
            compared.emplace_back(ref.kind == ParamRef::Kind::J ? 'J' : 'U', ref.index);
            if (ref.kind == ParamRef::Kind::J) {
                result.parameter_names.push_back(geometry.bond_name(ref.index));
            } else {
                result.parameter_names.push_back("U" + std::to_string(ref.index + 1));
            }
        }
    }

    // The candidate assignments are identical for every measurement set (all
    // non-group parameters sit at the prior center), so log-probability
    // vectors are shared across sets and snapshot counts.
    LogProbCache cache;

    auto stddev = [](const Eigen::MatrixXd& m) {
        double mean = m.mean();
        return std::sqrt((m.array() - mean).square().sum() / static_cast<double>(m.size()));
    };

    for (std::size_t ci = 0; ci < protocol.snapshot_counts.size(); ++ci) {
        int n_shots = protocol.snapshot_counts[ci];
        const EstimatorSuite& suite = *suites[ci];

        auto cases = make_test_cases(geometry, basis, prior, quench, protocol.n_sets, n_shots,
                                     SplitMix64::derive_stream(protocol.seed, ci), n_threads);

        ComparisonResult::PerCount pc;
        pc.n_shots = n_shots;
        pc.nn_errors.resize(protocol.n_sets, static_cast<Eigen::Index>(compared.size()));
        pc.bayes_errors.resize(protocol.n_sets, static_cast<Eigen::Index>(compared.size()));

        for (int set = 0; set < protocol.n_sets; ++set) {
            const TestCase& tc = cases[static_cast<std::size_t>(set)];

            ParameterEstimate nn = estimate(suite, tc.shots);

            BayesState state{prior.centers(), 0};
            ParameterSet bayes_params = state.params;
            for (int iter = 0; iter < protocol.schedule.n_iterations; ++iter) {
                for (const auto& group : protocol.schedule.groups) {
                    BayesState current{bayes_params, iter};
                    auto posterior = group_log_likelihood(geometry, basis, tc.shots, current,
                                                          group, grid, quench, n_threads, &cache);
                    bayes_params =
                        apply_combo(bayes_params, group, posterior.combos[posterior.argmax]);
                }
            }

            for (std::size_t p = 0; p < compared.size(); ++p) {
                auto [kind, index] = compared[p];
                double truth, nn_est, bayes_est;
                if (kind == 'J') {
                    truth = tc.truth.J[static_cast<std::size_t>(index)];
                    nn_est = nn.value_of(geometry.bond_name(index));
                    bayes_est = bayes_params.J[static_cast<std::size_t>(index)];
                } else {
                    truth = tc.truth.U[static_cast<std::size_t>(index)];
                    nn_est = nn.value_of("U" + std::to_string(index + 1));
                    bayes_est = bayes_params.U[static_cast<std::size_t>(index)];
                }
                pc.nn_errors(set, static_cast<Eigen::Index>(p)) = nn_est - truth;
                pc.bayes_errors(set, static_cast<Eigen::Index>(p)) = bayes_est - truth;
            }
        }

        pc.nn_std = stddev(pc.nn_errors);
        pc.bayes_std = stddev(pc.bayes_errors);
        result.per_count.push_back(std::move(pc));
    }
    return result;
}

}  // namespace bhtomo
