#include "niwalk/survival.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>

#include "niwalk/parallel.hpp"

namespace niwalk {

std::uint64_t tuple_death_step(std::uint64_t master_seed, std::uint64_t pair_index,
                               std::uint32_t m, std::uint32_t n,
                               std::uint64_t max_steps, TupleTracker& workspace) {
    workspace.reset();
    const std::uint32_t k = m + n;
    std::vector<RandomStream> streams;
    streams.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i)
        streams.emplace_back(SeedSpec{master_seed, stream_id::survival_walker(pair_index, i)});
    workspace.advance([&](std::uint32_t i) { return streams[i].step6(); }, max_steps);
    if (auto d = workspace.first_intersection_step()) return *d;
    return max_steps + 1;
}

namespace {

constexpr std::uint64_t kChunkPairs = 1024;

struct ChunkResult {
    bool ready = false;
    std::vector<std::uint64_t> counts;
};

void validate(const TupleExperimentConfig& c) {
    if (c.pairs == 0) throw std::invalid_argument("experiment: pairs must be positive");
    if (c.checkpoints.empty())
        throw std::invalid_argument("experiment: checkpoints must be nonempty");
    if (!std::is_sorted(c.checkpoints.begin(), c.checkpoints.end()) ||
        c.checkpoints.front() < 1 || c.checkpoints.back() > c.max_steps)
        throw std::invalid_argument(
            "experiment: checkpoints must be sorted within [1, max_steps]");
    if (c.group_m == 0 || c.group_n == 0)
        throw std::invalid_argument("experiment: group sizes must be >= 1");
}

}  // namespace

RunOutcome run_tuple_experiment(const TupleExperimentConfig& config,
                                std::uint64_t master_seed,
                                const RunControl& control,
                                const ExperimentProgress* resume_from) {
    validate(config);
    const std::size_t n_cp = config.checkpoints.size();

    std::uint64_t start = 0;
    std::vector<std::uint64_t> committed(n_cp, 0);
    if (resume_from) {
        if (resume_from->committed_counts.size() != n_cp)
            throw data_error("resume: checkpoint count mismatch");
        start = resume_from->cursor;
        committed = resume_from->committed_counts;
    }
    std::uint64_t stop = config.pairs;
    if (control.stop_after_pairs > 0)
        stop = std::min(stop, start + control.stop_after_pairs);

    const std::uint64_t first_chunk = start / kChunkPairs;
    const std::uint64_t last_chunk = (stop + kChunkPairs - 1) / kChunkPairs;

    std::mutex merge_mutex;
    std::map<std::uint64_t, std::vector<std::uint64_t>> pending;
    std::uint64_t next_to_merge = first_chunk;
    std::uint64_t cursor = start;
    std::atomic<bool> cancelled{false};

    auto merge_ready = [&](std::unique_lock<std::mutex>&) {
        while (true) {
            auto it = pending.find(next_to_merge);
            if (it == pending.end()) break;
            for (std::size_t c = 0; c < n_cp; ++c) committed[c] += it->second[c];
            std::uint64_t chunk_end = std::min((next_to_merge + 1) * kChunkPairs, stop);
            cursor = chunk_end;
            pending.erase(it);
            ++next_to_merge;
            if (control.on_progress) {
                ExperimentProgress p{cursor, committed};
                if (!control.on_progress(p)) cancelled.store(true);
            }
        }
    };

    parallel_for_index(first_chunk, last_chunk, config.threads, [&](std::uint64_t chunk) {
        if (cancelled.load(std::memory_order_relaxed)) return;
        std::uint64_t lo = std::max(start, chunk * kChunkPairs);
        std::uint64_t hi = std::min(stop, (chunk + 1) * kChunkPairs);
        std::vector<std::uint64_t> local(n_cp, 0);
        TupleTracker workspace(config.group_m, config.group_n);
        for (std::uint64_t pair = lo; pair < hi; ++pair) {
            std::uint64_t death = tuple_death_step(master_seed, pair, config.group_m,
                                                   config.group_n, config.max_steps,
                                                   workspace);
            for (std::size_t c = 0; c < n_cp && config.checkpoints[c] < death; ++c)
                ++local[c];
        }
        std::unique_lock<std::mutex> lock(merge_mutex);
        pending.emplace(chunk, std::move(local));
        merge_ready(lock);
    });

    RunOutcome out;
    out.progress = {cursor, committed};
    out.complete = (cursor == config.pairs) && !cancelled.load();
    if (out.complete) {
        SurvivalTable t;
        t.master_seed = master_seed;
        t.group_m = config.group_m;
        t.group_n = config.group_n;
        t.total_pairs = config.pairs;
        t.max_steps = config.max_steps;
        t.h_lag = config.h_lag;
        t.checkpoints = config.checkpoints;
        t.counts = committed;
        out.table = std::move(t);
    }
    return out;
}

RunOutcome run_survival_experiment(const TupleExperimentConfig& config,
                                   std::uint64_t master_seed,
                                   const RunControl& control,
                                   const ExperimentProgress* resume_from) {
    TupleExperimentConfig c = config;
    c.group_m = 1;
    c.group_n = 1;
    return run_tuple_experiment(c, master_seed, control, resume_from);
}

}  // namespace niwalk
