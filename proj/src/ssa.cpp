#include "patchproc/ssa.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "patchproc/equilibrium.hpp"
#include "patchproc/error.hpp"

namespace patchproc {

void StopRule::validate() const
{
    if (outbreak_threshold < 2) throw ValidationError("stop.outbreak_threshold must be an integer >= 2");
    if (max_events < 1) throw ValidationError("stop.max_events must be positive");
    if (!(max_time > 0.0)) throw ValidationError("stop.max_time must be positive");
}

StopRule StopRule::quasi_steady(const ModelSpec& model)
{
    StopRule rule;
    rule.outbreak_threshold = quasi_steady_threshold(model);
    return rule;
}

std::string_view outcome_name(OutcomeKind k)
{
    switch (k) {
    case OutcomeKind::Extinct:
        return "extinct";
    case OutcomeKind::Outbreak:
        return "outbreak";
    case OutcomeKind::Censored:
        return "censored";
    }
    return "censored";
}

RealizationLog::RealizationLog(std::ostream& os, const ModelSpec& model) : os_(os)
{
    os_ << "event_index,t,reaction_label";
    for (const auto& name : model.state_names()) os_ << ',' << name;
    os_ << '\n';
    os_.precision(std::numeric_limits<double>::max_digits10);
}

void RealizationLog::record(std::int64_t event_index, double t, std::string_view label,
                            std::span<const std::int64_t> x)
{
    os_ << event_index << ',' << t << ',' << label;
    for (auto v : x) os_ << ',' << v;
    os_ << '\n';
}

namespace {

void mark_subspaces(const ModelSpec& model, const StateVec& x, double t, std::vector<double>& first_hit)
{
    const auto& subspaces = model.subspaces();
    for (std::size_t s = 0; s < subspaces.size(); ++s) {
        if (std::isnan(first_hit[s]) && subspaces[s].contains(x)) first_hit[s] = t;
    }
}

}  // namespace

Outcome simulate_one(const ModelSpec& model, const StateVec& init, const StopRule& stop, RngSpec rng_spec,
                     RealizationLog* log)
{
    model.check_state(init);
    stop.validate();

    StreamRng rng(rng_spec);
    const auto& reactions = model.reactions();
    const auto& infectious = model.infectious_idx();
    std::vector<double> rates(reactions.size());
    std::vector<double> first_hit(model.subspaces().size(), std::numeric_limits<double>::quiet_NaN());

    Outcome out;
    StateVec x = init;
    double t = 0.0;
    std::int64_t events = 0;
    if (log) log->record(0, t, "initial", x);
    mark_subspaces(model, x, t, first_hit);

    for (;;) {
        std::int64_t infectious_total = 0;
        for (auto i : infectious) infectious_total += x[i];
        if (infectious_total == 0) {
            out.kind = OutcomeKind::Extinct;
            break;
        }
        if (infectious_total >= stop.outbreak_threshold) {
            out.kind = OutcomeKind::Outbreak;
            break;
        }
        if (events >= stop.max_events) {
            out.kind = OutcomeKind::Censored;
            break;
        }

        double total = 0.0;
        for (std::size_t j = 0; j < reactions.size(); ++j) {
            rates[j] = reactions[j].rate_at(std::span<const std::int64_t>(x));
            total += rates[j];
        }
        if (!(total > 0.0)) {
            // Death reactions are always available while infectious mass is present.
            throw std::logic_error("zero total rate with infectious individuals present");
        }

        const double dt = rng.exponential(total);
        if (t + dt > stop.max_time) {
            t = stop.max_time;
            out.kind = OutcomeKind::Censored;
            break;
        }
        t += dt;

        double target = rng.uniform() * total;
        std::size_t chosen = reactions.size();
        for (std::size_t j = 0; j < reactions.size(); ++j) {
            if (rates[j] <= 0.0) continue;
            chosen = j;
            target -= rates[j];
            if (target < 0.0) break;
        }
        const auto& stoich = reactions[chosen].stoichiometry;
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += stoich[k];
        assert(std::all_of(x.begin(), x.end(), [](std::int64_t v) { return v >= 0; }));
        ++events;

        if (log) log->record(events, t, reactions[chosen].label, x);
        mark_subspaces(model, x, t, first_hit);
    }

    out.t_final = t;
    out.events_used = events;
    for (std::size_t s = 0; s < first_hit.size(); ++s) {
        if (!std::isnan(first_hit[s])) out.partial_hits.emplace(model.subspaces()[s].name, first_hit[s]);
    }
    out.final_state = std::move(x);
    return out;
}

McEstimate McEstimate::from_counts(std::int64_t hits, std::int64_t n)
{
    if (n < 1 || hits < 0 || hits > n) throw ValidationError("invalid Monte Carlo counts");
    McEstimate e;
    e.hits = hits;
    e.n = n;
    e.p_hat = static_cast<double>(hits) / static_cast<double>(n);
    e.std_err = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(n));
    return e;
}

namespace {

constexpr std::int64_t kChunk = 4096;

struct ChunkTally {
    std::int64_t extinct = 0;
    std::int64_t outbreaks = 0;
    std::int64_t censored = 0;
    double time_sum = 0.0;
    double time_sq_sum = 0.0;
    std::vector<std::int64_t> subspace_hits;
};

}  // namespace

ExtinctionEstimate estimate_extinction(const ModelSpec& model, const StateVec& init, const StopRule& stop,
                                       std::int64_t n, std::uint64_t master_seed, unsigned threads)
{
    if (n < 1) throw ValidationError("n must be at least 1");
    model.check_state(init);
    stop.validate();

    const std::int64_t chunks = (n + kChunk - 1) / kChunk;
    const std::size_t n_sub = model.subspaces().size();
    std::vector<ChunkTally> tallies(static_cast<std::size_t>(chunks));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto worker = [&] {
        try {
            for (std::int64_t c = next++; c < chunks && !failed; c = next++) {
                ChunkTally tally;
                tally.subspace_hits.assign(n_sub, 0);
                const std::int64_t end = std::min(n, (c + 1) * kChunk);
                for (std::int64_t r = c * kChunk; r < end; ++r) {
                    const auto o = simulate_one(model, init, stop, {master_seed, static_cast<std::uint64_t>(r)});
                    switch (o.kind) {
                    case OutcomeKind::Extinct:
                        ++tally.extinct;
                        tally.time_sum += o.t_final;
                        tally.time_sq_sum += o.t_final * o.t_final;
                        break;
                    case OutcomeKind::Outbreak:
                        ++tally.outbreaks;
                        break;
                    case OutcomeKind::Censored:
                        ++tally.censored;
                        break;
                    }
                    for (std::size_t s = 0; s < n_sub; ++s) {
                        if (o.partial_hits.contains(model.subspaces()[s].name)) ++tally.subspace_hits[s];
                    }
                }
                tallies[static_cast<std::size_t>(c)] = std::move(tally);
            }
        } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::int64_t>(threads, chunks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    // Reduce in chunk order so floating-point sums do not depend on the schedule.
    ExtinctionEstimate est;
    std::int64_t extinct = 0;
    double time_sum = 0.0, time_sq_sum = 0.0;
    std::vector<std::int64_t> sub_hits(n_sub, 0);
    for (const auto& t : tallies) {
        extinct += t.extinct;
        est.outbreaks += t.outbreaks;
        est.censored += t.censored;
        time_sum += t.time_sum;
        time_sq_sum += t.time_sq_sum;
        for (std::size_t s = 0; s < n_sub; ++s) sub_hits[s] += t.subspace_hits[s];
    }
    est.extinct = McEstimate::from_counts(extinct, n);
    if (extinct > 0) {
        const double m = time_sum / static_cast<double>(extinct);
        est.mean_extinction_time = m;
        if (extinct > 1) {
            const double var =
                std::max(0.0, (time_sq_sum - extinct * m * m) / static_cast<double>(extinct - 1));
            est.extinction_time_std_err = std::sqrt(var / static_cast<double>(extinct));
        }
    }
    for (std::size_t s = 0; s < n_sub; ++s) {
        est.subspaces.push_back({model.subspaces()[s].name, McEstimate::from_counts(sub_hits[s], n)});
    }
    return est;
}

nlohmann::json to_json(const McEstimate& e)
{
    return {{"hits", e.hits}, {"n", e.n}, {"p_hat", e.p_hat}, {"std_err", e.std_err}};
}

nlohmann::json to_json(const ExtinctionEstimate& e)
{
    auto j = to_json(e.extinct);
    j["censored"] = e.censored;
    j["outbreaks"] = e.outbreaks;
    j["mean_extinction_time"] = e.mean_extinction_time;
    j["extinction_time_std_err"] = e.extinction_time_std_err;
    auto subs = nlohmann::json::object();
    for (const auto& s : e.subspaces) subs[s.name] = to_json(s.estimate);
    j["subspaces"] = subs;
    return j;
}

nlohmann::json to_json(const Outcome& o)
{
    auto hits = nlohmann::json::object();
    for (const auto& [name, t] : o.partial_hits) hits[name] = t;
    return {{"kind", outcome_name(o.kind)},
            {"t_final", o.t_final},
            {"events_used", o.events_used},
            {"partial_hits", hits},
            {"final_state", o.final_state}};
}

}  // namespace patchproc
