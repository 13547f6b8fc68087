// Copyright 2026-present the rqkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bench.hpp"
#include "codec.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "lloydmax.hpp"
#include "mixed_precision.hpp"
#include "parallel.hpp"
#include "random.hpp"

#ifndef RQKIT_GIT_DESCRIBE
#define RQKIT_GIT_DESCRIBE "unknown"
#endif

namespace rqkit {

using nlohmann::json;

namespace {

constexpr uint64_t RUN_STREAM = 0x72756e00ULL;
constexpr uint64_t OUTLIER_STREAM = 0x6f75746cULL;

uint64_t
run_seed(uint64_t seed, uint64_t run) {
    return mix_seed(seed, RUN_STREAM + run);
}

json
lloyd_defaults() {
    const LloydMaxOptions o;
    return {{"tol", o.tol}, {"max_iter", o.max_iter}, {"grid_cells", o.grid_cells}};
}

LloydMaxOptions
parse_lloyd(const json& j) {
    LloydMaxOptions o;
    o.tol = j.at("tol").get<double>();
    o.max_iter = j.at("max_iter").get<uint32_t>();
    o.grid_cells = j.at("grid_cells").get<uint32_t>();
    if (!(o.tol > 0.0) || o.max_iter == 0 || o.grid_cells < 16) {
        throw_invalid("lloyd options need tol > 0, max_iter >= 1, grid_cells >= 16");
    }
    return o;
}

RescaleStrategy
parse_strategy(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exhaustive") {
        return RescaleStrategy::exhaustive();
    }
    if (kind == "candidate-set") {
        return RescaleStrategy::candidate_set(j.at("candidates").get<std::vector<double>>());
    }
    if (kind == "expected-factor") {
        return RescaleStrategy::expected_factor(
            j.value("samples", RescaleStrategy::DEFAULT_EXPECTED_SAMPLES));
    }
    throw_invalid("unknown rescale strategy '" + kind +
                  "' (expected exhaustive, candidate-set, expected-factor)");
}

json
strategy_defaults() {
    return {{"kind", "exhaustive"}};
}

CodecConfig
codec_config(const json& cfg, Method method, unsigned bits, uint64_t seed) {
    CodecConfig c;
    c.method = method;
    c.bits = bits;
    c.rotation = parse_rotation(cfg.at("rotation").get<std::string>());
    c.rounds = cfg.at("rounds").get<uint32_t>();
    c.strategy = parse_strategy(cfg.at("strategy"));
    c.seed = seed;
    c.lloyd = parse_lloyd(cfg.at("lloyd"));
    c.cache_dir = cfg.at("cache_dir").get<std::string>();
    return c;
}

std::vector<Method>
parse_methods(const json& j) {
    std::vector<Method> out;
    for (const auto& m : j) {
        out.push_back(parse_method(m.get<std::string>()));
    }
    if (out.empty()) {
        throw_invalid("methods list must not be empty");
    }
    return out;
}

std::vector<unsigned>
parse_bits(const json& j) {
    std::vector<unsigned> out = j.get<std::vector<unsigned>>();
    if (out.empty()) {
        throw_invalid("bits list must not be empty");
    }
    for (unsigned b : out) {
        if (b < 1 || b > 8) {
            throw_invalid("bits must be in [1, 8], got " + std::to_string(b));
        }
    }
    return out;
}

template <typename T>
T
positive(const json& cfg, const char* key) {
    const T v = cfg.at(key).get<T>();
    if (v < 1) {
        throw_invalid(std::string(key) + " must be >= 1");
    }
    return v;
}

std::string
fmt(double v) {
    return format_double(v);
}

std::string
fmt(size_t v) {
    return std::to_string(v);
}

std::string
bits_tag(const std::string& method, unsigned bits) {
    return method + "/b" + std::to_string(bits);
}

void
normalize_rows(Dataset& ds) {
    for (size_t i = 0; i < ds.n; ++i) {
        double sq = 0.0;
        for (float v : ds.row(i)) {
            sq += static_cast<double>(v) * v;
        }
        if (!(sq > 0.0)) {
            throw_degenerate("query " + std::to_string(i) + " has zero norm");
        }
        const double inv = 1.0 / std::sqrt(sq);
        for (uint32_t j = 0; j < ds.dim; ++j) {
            ds.data[i * ds.dim + j] = static_cast<float>(ds.data[i * ds.dim + j] * inv);
        }
    }
}

double
dot(std::span<const float> a, std::span<const float> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        s += static_cast<double>(a[i]) * b[i];
    }
    return s;
}

// ---------------------------------------------------------------- codebook

json
codebook_defaults() {
    return {{"dims", {128}},
            {"bits", {1, 2, 3, 4}},
            {"sweep_points", 50},
            {"lloyd", lloyd_defaults()},
            {"cache_dir", ""}};
}

ExperimentResult
run_codebook(const json& cfg, unsigned /*threads*/) {
    ExperimentResult r;
    r.header = {"dim", "bits", "index", "centroid", "distortion", "best_uniform_distortion",
                "converged", "iterations"};
    const auto dims = cfg.at("dims").get<std::vector<uint32_t>>();
    const auto bits_list = parse_bits(cfg.at("bits"));
    const auto sweep = positive<uint32_t>(cfg, "sweep_points");
    const LloydMaxOptions lloyd = parse_lloyd(cfg.at("lloyd"));
    const std::string cache_dir = cfg.at("cache_dir").get<std::string>();
    for (uint32_t dim : dims) {
        const MarginalGrid grid(dim, lloyd.grid_cells);
        for (unsigned bits : bits_list) {
            const auto cb = cached_codebook(dim, bits, lloyd, cache_dir);
            const double distortion = codebook_distortion(*cb, grid);
            const size_t levels = size_t{1} << bits;
            const double reach = std::min(1.0, 6.0 / std::sqrt(static_cast<double>(dim)));
            double best_uniform = INFINITY;
            for (uint32_t k = 1; k <= sweep; ++k) {
                const double a = reach * static_cast<double>(k) / static_cast<double>(sweep);
                ScalarCodebook uniform;
                uniform.dim_context = dim;
                uniform.bits = static_cast<uint8_t>(bits);
                for (size_t i = 0; i < levels; ++i) {
                    uniform.centroids.push_back(
                        -a + 2.0 * a * static_cast<double>(i) / static_cast<double>(levels - 1));
                }
                refresh_boundaries(uniform);
                best_uniform = std::min(best_uniform, codebook_distortion(uniform, grid));
            }
            for (size_t i = 0; i < cb->size(); ++i) {
                r.rows.push_back({std::to_string(dim), std::to_string(bits), fmt(i),
                                  fmt(cb->centroids[i]), fmt(distortion), fmt(best_uniform),
                                  cb->converged ? "1" : "0", std::to_string(cb->iterations)});
            }
            const std::string tag = "d" + std::to_string(dim) + "/b" + std::to_string(bits);
            r.checks.push_back({"converged/" + tag, cb->converged,
                                "iterations=" + std::to_string(cb->iterations) +
                                    " movement=" + fmt(cb->final_movement)});
            r.checks.push_back({"beats_uniform/" + tag,
                                distortion <= best_uniform * (1.0 + 1e-9) + 1e-15,
                                "lloyd=" + fmt(distortion) + " uniform=" + fmt(best_uniform)});
        }
    }
    return r;
}

// ---------------------------------------------------------------- quantize

json
quantize_defaults() {
    return {{"input", ""},
            {"n", 1000},
            {"dim", 128},
            {"distribution", "gaussian"},
            {"method", "rabitq-prod"},
            {"bits", 4},
            {"rotation", "dense"},
            {"rounds", FastRotation::DEFAULT_ROUNDS},
            {"seed", 0},
            {"strategy", strategy_defaults()},
            {"lloyd", lloyd_defaults()},
            {"cache_dir", ""},
            {"codes_path", ""}};
}

ExperimentResult
run_quantize(const json& cfg, unsigned threads) {
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    const std::string input = cfg.at("input").get<std::string>();
    const Dataset data =
        input.empty() ? generate_synthetic(positive<size_t>(cfg, "n"), positive<uint32_t>(cfg, "dim"),
                                           parse_distribution(cfg.at("distribution").get<std::string>()),
                                           seed)
                      : load_dataset(input);
    const Method method = parse_method(cfg.at("method").get<std::string>());
    const unsigned bits = parse_bits(json::array({cfg.at("bits")})).front();
    const Codec codec(codec_config(cfg, method, bits, seed), data.dim);

    std::vector<EncodedVector> codes(data.n);
    std::vector<double> sq_err(data.n);
    std::vector<double> rel_err(data.n);
    parallel_for(data.n, threads, [&](size_t i) {
        const std::vector<double> x = data.row_f64(i);
        std::vector<double> xr(codec.code_dim());
        codec.rotation().apply_into(x, xr);
        codes[i] = codec.encode_rotated(xr);
        const std::vector<double> rec = codec.reconstruct_rotated(codes[i]);
        double e = 0.0;
        double nn = 0.0;
        for (size_t j = 0; j < xr.size(); ++j) {
            e += (xr[j] - rec[j]) * (xr[j] - rec[j]);
            nn += xr[j] * xr[j];
        }
        sq_err[i] = e;
        rel_err[i] = nn > 0.0 ? e / nn : 0.0;
    });
    CompensatedSum se;
    CompensatedSum re;
    size_t low_quality = 0;
    for (size_t i = 0; i < data.n; ++i) {
        se.add(sq_err[i]);
        re.add(rel_err[i]);
        if (const auto* c = std::get_if<RabitqCode>(&codes[i]); c != nullptr && c->low_quality) {
            ++low_quality;
        }
    }

    ExperimentResult r;
    const std::string codes_path = cfg.at("codes_path").get<std::string>();
    std::string code_bytes = "0";
    if (!codes_path.empty()) {
        std::ofstream out(codes_path, std::ios::binary);
        if (!out) {
            throw_io("cannot open " + codes_path + " for writing");
        }
        const auto dim = codec.code_dim();
        const auto b = static_cast<uint8_t>(bits);
        if (method == Method::RABITQ_PROD || method == Method::RABITQ_MSE) {
            std::vector<RabitqCode> v;
            for (auto& c : codes) {
                v.push_back(std::get<RabitqCode>(c));
            }
            save_rabitq_codes(out, v, dim, b);
        } else if (method == Method::TQ_MSE) {
            std::vector<TqMseCode> v;
            for (auto& c : codes) {
                v.push_back(std::get<TqMseCode>(c));
            }
            save_tq_mse_codes(out, v, dim, b);
        } else {
            std::vector<TqProdCode> v;
            for (auto& c : codes) {
                v.push_back(std::get<TqProdCode>(c));
            }
            save_tq_prod_codes(out, v, dim, b, seed);
        }
        out.close();
        codec.rotation().save(codes_path + ".rot");
        std::ifstream sized(codes_path, std::ios::binary | std::ios::ate);
        code_bytes = std::to_string(static_cast<long long>(sized.tellg()));

        std::ifstream back(codes_path, std::ios::binary);
        bool same = true;
        if (method == Method::RABITQ_PROD || method == Method::RABITQ_MSE) {
            const auto loaded = load_rabitq_codes(back);
            same = loaded.size() == codes.size();
            for (size_t i = 0; same && i < loaded.size(); ++i) {
                same = loaded[i].codes == std::get<RabitqCode>(codes[i]).codes;
            }
        } else if (method == Method::TQ_MSE) {
            const auto loaded = load_tq_mse_codes(back);
            same = loaded.size() == codes.size();
            for (size_t i = 0; same && i < loaded.size(); ++i) {
                same = loaded[i].indices == std::get<TqMseCode>(codes[i]).indices;
            }
        } else {
            const auto loaded = load_tq_prod_codes(back);
            same = loaded.size() == codes.size();
            for (size_t i = 0; same && i < loaded.size(); ++i) {
                same = loaded[i].signs == std::get<TqProdCode>(codes[i]).signs;
            }
        }
        r.checks.push_back({"codes_roundtrip", same, codes_path});
    }
    r.header = {"method", "bits", "rotation", "n", "dim", "code_dim", "code_file_bytes",
                "mean_sq_error", "mean_rel_sq_error", "low_quality"};
    r.rows.push_back({method_name(method), std::to_string(bits),
                      rotation_name(codec.rotation().kind()), fmt(data.n), std::to_string(data.dim),
                      std::to_string(codec.code_dim()), code_bytes,
                      fmt(se.value() / static_cast<double>(data.n)),
                      fmt(re.value() / static_cast<double>(data.n)), fmt(low_quality)});
    r.extra["source"] = data.source;
    return r;
}

// ---------------------------------------------------------------- eval-ip

json
eval_ip_defaults() {
    return {{"dim", 128},
            {"pairs", 2000},
            {"rotation_seeds", 20},
            {"bits", {1, 2, 4, 8}},
            {"methods", {"rabitq-prod", "tq-prod"}},
            {"rotation", "dense"},
            {"rounds", FastRotation::DEFAULT_ROUNDS},
            {"seed", 0},
            {"strategy", strategy_defaults()},
            {"chebyshev_multipliers", {1.0, 1.5, 2.0, 3.0, 4.0}},
            {"lloyd", lloyd_defaults()},
            {"cache_dir", ""}};
}

ExperimentResult
run_eval_ip(const json& cfg, unsigned threads) {
    const auto dim = positive<uint32_t>(cfg, "dim");
    const auto pairs = positive<size_t>(cfg, "pairs");
    const auto seeds = positive<uint32_t>(cfg, "rotation_seeds");
    const auto bits_list = parse_bits(cfg.at("bits"));
    const auto methods = parse_methods(cfg.at("methods"));
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    const auto multipliers = cfg.at("chebyshev_multipliers").get<std::vector<double>>();

    const Dataset xs = generate_synthetic(pairs, dim, Distribution::UNIT_SPHERE, mix_seed(seed, stream::DATA));
    const Dataset ys = generate_synthetic(pairs, dim, Distribution::UNIT_SPHERE, mix_seed(seed, stream::QUERY));
    std::vector<double> truth(pairs);
    for (size_t i = 0; i < pairs; ++i) {
        truth[i] = dot(xs.row(i), ys.row(i));
    }

    ExperimentResult r;
    r.header = {"method", "bits", "count", "mean", "std", "max_abs", "q50", "q90", "q99",
                "mean_seed_std", "mean_seed_max_abs"};
    json seed_list = json::array();
    for (uint32_t s = 0; s < seeds; ++s) {
        seed_list.push_back(run_seed(seed, s));
    }
    r.extra["rotation_seed_values"] = seed_list;
    r.extra["chebyshev"] = json::array();
    std::map<std::pair<Method, unsigned>, double> seed_std;

    for (Method method : methods) {
        for (unsigned bits : bits_list) {
            std::vector<double> errors(static_cast<size_t>(seeds) * pairs);
            CompensatedSum std_sum;
            CompensatedSum max_sum;
            for (uint32_t s = 0; s < seeds; ++s) {
                const Codec codec(codec_config(cfg, method, bits, run_seed(seed, s)), dim);
                double* out = errors.data() + static_cast<size_t>(s) * pairs;
                parallel_for(pairs, threads, [&](size_t i) {
                    const EncodedVector code = codec.encode(xs.row_f64(i));
                    const QueryContext q = codec.prepare(ys.row_f64(i));
                    out[i] = codec.estimate(code, q) - truth[i];
                });
                const ErrorStats st = error_stats(std::span<const double>(out, pairs));
                std_sum.add(st.std);
                max_sum.add(st.max_abs);
            }
            const ErrorStats st = error_stats(errors);
            const double mean_seed_std = std_sum.value() / seeds;
            seed_std[{method, bits}] = mean_seed_std;
            const std::string name = method_name(method);
            r.rows.push_back({name, std::to_string(bits), fmt(st.count), fmt(st.mean), fmt(st.std),
                              fmt(st.max_abs), fmt(st.quantiles[0].second),
                              fmt(st.quantiles[1].second), fmt(st.quantiles[2].second),
                              fmt(mean_seed_std), fmt(max_sum.value() / seeds)});

            if (method == Method::RABITQ_PROD || method == Method::TQ_PROD) {
                const double limit = 4.0 * st.std / std::sqrt(static_cast<double>(st.count));
                r.checks.push_back({"unbiased/" + bits_tag(name, bits), std::abs(st.mean) <= limit,
                                    "mean=" + fmt(st.mean) + " limit=" + fmt(limit)});
            }
            std::vector<double> thresholds;
            for (double m : multipliers) {
                thresholds.push_back(st.std > 0.0 ? m * st.std : m);
            }
            const auto tail = chebyshev_tail_check(errors, thresholds);
            bool ok = true;
            std::string detail;
            const double slack = 2.0 / std::sqrt(static_cast<double>(st.count));
            for (const auto& p : tail) {
                ok = ok && p.empirical_tail <= p.bound * 1.05 + slack;
                detail += "t=" + fmt(p.threshold) + ":" + fmt(p.empirical_tail) + "<=" +
                          fmt(p.bound) + " ";
                r.extra["chebyshev"].push_back({{"method", name},
                                                {"bits", bits},
                                                {"threshold", p.threshold},
                                                {"empirical_tail", p.empirical_tail},
                                                {"bound", p.bound}});
            }
            r.checks.push_back({"chebyshev/" + bits_tag(name, bits), ok, detail});
        }
    }
    const bool has_pair = std::count(methods.begin(), methods.end(), Method::RABITQ_PROD) > 0 &&
                          std::count(methods.begin(), methods.end(), Method::TQ_PROD) > 0;
    if (has_pair) {
        for (unsigned bits : bits_list) {
            if (bits < 2) {
                continue;
            }
            const double a = seed_std[{Method::RABITQ_PROD, bits}];
            const double b = seed_std[{Method::TQ_PROD, bits}];
            r.checks.push_back({"std_order/b" + std::to_string(bits), a <= b,
                                "rabitq-prod=" + fmt(a) + " tq-prod=" + fmt(b)});
        }
    }
    return r;
}

// ---------------------------------------------------------------- eval-recall

json
eval_recall_defaults() {
    return {{"n", 10000},
            {"dim", 128},
            {"queries", 200},
            {"distribution", "unit-sphere"},
            {"base_path", ""},
            {"query_path", ""},
            {"bits", 4},
            {"runs", 10},
            {"methods", {"rabitq-prod", "tq-mse", "tq-prod"}},
            {"k_values", {1, 2, 4, 8, 16, 32, 64}},
            {"min_recall", 0.99},
            {"rotation", "dense"},
            {"rounds", FastRotation::DEFAULT_ROUNDS},
            {"seed", 0},
            {"strategy", strategy_defaults()},
            {"lloyd", lloyd_defaults()},
            {"cache_dir", ""}};
}

ExperimentResult
run_eval_recall(const json& cfg, unsigned threads) {
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    const Distribution dist = parse_distribution(cfg.at("distribution").get<std::string>());
    const std::string base_path = cfg.at("base_path").get<std::string>();
    const std::string query_path = cfg.at("query_path").get<std::string>();
    const Dataset base = base_path.empty()
                             ? generate_synthetic(positive<size_t>(cfg, "n"), positive<uint32_t>(cfg, "dim"),
                                                  dist, mix_seed(seed, stream::DATA))
                             : load_dataset(base_path);
    Dataset queries = query_path.empty()
                          ? generate_synthetic(positive<size_t>(cfg, "queries"), base.dim, dist,
                                               mix_seed(seed, stream::QUERY))
                          : load_dataset(query_path);
    if (queries.dim != base.dim) {
        throw_invalid("query dim " + std::to_string(queries.dim) + " does not match base dim " +
                      std::to_string(base.dim));
    }
    normalize_rows(queries);
    const unsigned bits = parse_bits(json::array({cfg.at("bits")})).front();
    const auto runs = positive<uint32_t>(cfg, "runs");
    const auto methods = parse_methods(cfg.at("methods"));
    auto k_values = cfg.at("k_values").get<std::vector<size_t>>();
    if (k_values.empty()) {
        throw_invalid("k_values must not be empty");
    }
    std::sort(k_values.begin(), k_values.end());
    const size_t k_max = k_values.back();
    if (k_values.front() < 1 || k_max > base.n) {
        throw_invalid("k_values must lie in [1, n]");
    }
    const double min_recall = cfg.at("min_recall").get<double>();

    const size_t nq = queries.n;
    std::vector<uint32_t> exact(nq);
    parallel_for(nq, threads, [&](size_t q) {
        exact[q] = brute_force_topk(base.data, base.n, base.dim, queries.row_f64(q), 1).front();
    });

    ExperimentResult r;
    r.header = {"method", "bits", "k", "recall", "recall_std", "runs"};
    r.extra["source"] = base.source;
    r.extra["n"] = base.n;
    r.extra["dim"] = base.dim;
    r.extra["queries"] = nq;
    json run_seeds = json::array();
    for (uint32_t run = 0; run < runs; ++run) {
        run_seeds.push_back(run_seed(seed, run));
    }
    r.extra["run_seed_values"] = run_seeds;
    r.extra["per_run"] = json::object();

    for (Method method : methods) {
        std::vector<std::vector<double>> per_run;
        for (uint32_t run = 0; run < runs; ++run) {
            const Codec codec(codec_config(cfg, method, bits, run_seed(seed, run)), base.dim);
            std::vector<EncodedVector> codes(base.n);
            parallel_for(base.n, threads, [&](size_t i) { codes[i] = codec.encode(base.row_f64(i)); });
            std::vector<size_t> rank(nq);
            parallel_for(nq, threads, [&](size_t q) {
                const QueryContext ctx = codec.prepare(queries.row_f64(q));
                std::vector<double> scores(base.n);
                for (size_t i = 0; i < base.n; ++i) {
                    scores[i] = codec.estimate(codes[i], ctx);
                }
                const auto top = topk_from_scores(scores, k_max);
                rank[q] = static_cast<size_t>(std::find(top.begin(), top.end(), exact[q]) - top.begin());
            });
            std::vector<double> curve;
            for (size_t k : k_values) {
                size_t hits = 0;
                for (size_t q = 0; q < nq; ++q) {
                    hits += rank[q] < k ? 1 : 0;
                }
                curve.push_back(static_cast<double>(hits) / static_cast<double>(nq));
            }
            per_run.push_back(std::move(curve));
        }
        const RecallResult res = summarize_recall(k_values, per_run);
        const std::string name = method_name(method);
        bool monotone = true;
        for (const auto& curve : res.per_run) {
            monotone = monotone && std::is_sorted(curve.begin(), curve.end());
        }
        for (size_t j = 0; j < k_values.size(); ++j) {
            r.rows.push_back({name, std::to_string(bits), fmt(k_values[j]), fmt(res.recall[j]),
                              fmt(res.std_per_k[j]), fmt(res.runs)});
        }
        r.extra["per_run"][name] = res.per_run;
        r.checks.push_back({"recall_monotone/" + name, monotone, std::to_string(runs) + " runs"});
        r.checks.push_back({"recall_at_" + std::to_string(k_max) + "/" + name,
                            res.recall.back() >= min_recall,
                            "recall=" + fmt(res.recall.back()) + " min=" + fmt(min_recall)});
    }
    return r;
}

// ---------------------------------------------------------------- bench-time

json
bench_defaults() {
    return {{"n", 100000},
            {"dim", 200},
            {"bits", 4},
            {"distribution", "gaussian"},
            {"input", ""},
            {"methods", {"rabitq-prod"}},
            {"rotations", {"dense", "fast"}},
            {"repeats", 3},
            {"rounds", FastRotation::DEFAULT_ROUNDS},
            {"seed", 0},
            {"strategy", strategy_defaults()},
            {"lloyd", lloyd_defaults()},
            {"cache_dir", ""}};
}

ExperimentResult
run_bench(const json& cfg, unsigned threads) {
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    const std::string input = cfg.at("input").get<std::string>();
    const Dataset data =
        input.empty() ? generate_synthetic(positive<size_t>(cfg, "n"), positive<uint32_t>(cfg, "dim"),
                                           parse_distribution(cfg.at("distribution").get<std::string>()),
                                           mix_seed(seed, stream::DATA))
                      : load_dataset(input);
    const unsigned bits = parse_bits(json::array({cfg.at("bits")})).front();
    const auto methods = parse_methods(cfg.at("methods"));
    const auto repeats = positive<unsigned>(cfg, "repeats");
    std::vector<RotationKind> rotations;
    for (const auto& k : cfg.at("rotations")) {
        rotations.push_back(parse_rotation(k.get<std::string>()));
    }
    if (rotations.empty()) {
        throw_invalid("rotations list must not be empty");
    }

    ExperimentResult r;
    r.header = {"method", "rotation", "n", "dim", "bits", "threads", "repeats", "min_seconds",
                "median_seconds", "rotation_seconds", "quantize_seconds"};
    r.extra["hardware"] = hardware_note();
    r.extra["threads"] = threads;
    for (Method method : methods) {
        std::map<RotationKind, double> medians;
        for (RotationKind rot : rotations) {
            json local = cfg;
            local["rotation"] = rotation_name(rot);
            const Codec codec(codec_config(local, method, bits, seed), data.dim);
            const TimingResult t = bench_quantize(data, codec, repeats, threads);
            medians[rot] = t.median_seconds;
            const std::string tag = method_name(method) + "/" + rotation_name(rot);
            r.rows.push_back({method_name(method), rotation_name(rot), fmt(data.n),
                              std::to_string(data.dim), std::to_string(bits),
                              std::to_string(t.threads), std::to_string(t.repeats),
                              fmt(t.min_seconds), fmt(t.median_seconds), fmt(t.rotation_seconds),
                              fmt(t.quantize_seconds)});
            bool inclusive = t.rotation_seconds > 0.0;
            for (size_t i = 0; i < t.samples.size(); ++i) {
                const double sections = t.rotation_samples[i] + t.quantize_samples[i];
                inclusive = inclusive &&
                            t.samples[i] * static_cast<double>(t.workers) >= sections;
            }
            r.checks.push_back({"rotation_included/" + tag, inclusive,
                                "median=" + fmt(t.median_seconds) +
                                    " rotation=" + fmt(t.rotation_seconds) +
                                    " quantize=" + fmt(t.quantize_seconds)});
        }
        if (data.dim >= 1024 && medians.count(RotationKind::DENSE) && medians.count(RotationKind::FAST)) {
            const double d = medians[RotationKind::DENSE];
            const double f = medians[RotationKind::FAST];
            r.checks.push_back({"fast_beats_dense/" + method_name(method), f < d,
                                "fast=" + fmt(f) + " dense=" + fmt(d)});
        }
    }
    return r;
}

// ---------------------------------------------------------------- mixed

json
mixed_defaults() {
    return {{"head_dim", 128},
            {"vectors", 1000},
            {"keys_path", ""},
            {"outlier_count", 32},
            {"outlier_scale", 4.0},
            {"configs", {{3, 2}, {4, 3}}},
            {"codecs", {"rabitq", "tq-mse"}},
            {"rotate", true},
            {"seed", 0},
            {"strategy", strategy_defaults()},
            {"lloyd", lloyd_defaults()},
            {"cache_dir", ""}};
}

MixedCodec
parse_mixed_codec(const std::string& name) {
    if (name == "rabitq") {
        return MixedCodec::RABITQ;
    }
    if (name == "tq-mse") {
        return MixedCodec::TURBOQUANT_MSE;
    }
    throw_invalid("unknown mixed codec '" + name + "' (expected rabitq or tq-mse)");
}

ExperimentResult
run_mixed(const json& cfg, unsigned threads) {
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    const std::string keys_path = cfg.at("keys_path").get<std::string>();
    Dataset keys;
    if (keys_path.empty()) {
        const auto head_dim = positive<uint32_t>(cfg, "head_dim");
        keys = generate_synthetic(positive<size_t>(cfg, "vectors"), head_dim, Distribution::GAUSSIAN,
                                  mix_seed(seed, stream::DATA));
        // Inflate a seeded subset of channels so that outliers exist.
        const auto count = cfg.at("outlier_count").get<uint32_t>();
        const double scale = cfg.at("outlier_scale").get<double>();
        std::vector<uint32_t> perm(head_dim);
        for (uint32_t i = 0; i < head_dim; ++i) {
            perm[i] = i;
        }
        Rng rng(mix_seed(seed, OUTLIER_STREAM));
        for (uint32_t i = head_dim; i > 1; --i) {
            const auto j = static_cast<uint32_t>(rng.next_u64() % i);
            std::swap(perm[i - 1], perm[j]);
        }
        for (uint32_t c = 0; c < std::min(count, head_dim); ++c) {
            for (size_t row = 0; row < keys.n; ++row) {
                keys.data[row * head_dim + perm[c]] =
                    static_cast<float>(keys.data[row * head_dim + perm[c]] * scale);
            }
        }
    } else {
        keys = load_dataset(keys_path);
    }
    const auto count = cfg.at("outlier_count").get<uint32_t>();
    const ChannelSplit split = select_outlier_channels(keys.data, keys.n, keys.dim, count);

    ExperimentResult r;
    r.header = {"codec", "hi_bits", "lo_bits", "outliers", "effective_bitwidth",
                "serialized_bytes", "mse"};
    r.extra["outlier_idx"] = split.outlier_idx;
    r.extra["source"] = keys.source;
    for (const auto& codec_name : cfg.at("codecs")) {
        const std::string cname = codec_name.get<std::string>();
        struct Row {
            unsigned hi;
            unsigned lo;
            double mse;
        };
        std::vector<Row> results;
        for (const auto& pair : cfg.at("configs")) {
            const auto hl = pair.get<std::vector<unsigned>>();
            if (hl.size() != 2) {
                throw_invalid("each mixed config must be [hi_bits, lo_bits]");
            }
            MixedConfig mc;
            mc.hi_bits = static_cast<uint8_t>(hl[0]);
            mc.lo_bits = static_cast<uint8_t>(hl[1]);
            mc.codec = parse_mixed_codec(cname);
            mc.seed = seed;
            mc.rotate = cfg.at("rotate").get<bool>();
            mc.strategy = parse_strategy(cfg.at("strategy"));
            mc.lloyd = parse_lloyd(cfg.at("lloyd"));
            mc.cache_dir = cfg.at("cache_dir").get<std::string>();
            const MixedQuantizer quantizer(split, mc);
            std::vector<double> err(keys.n);
            std::vector<char> roundtrip(keys.n, 1);
            parallel_for(keys.n, threads, [&](size_t i) {
                const std::vector<double> x = keys.row_f64(i);
                const MixedCode code = quantizer.quantize(x);
                const std::vector<uint8_t> bytes = quantizer.serialize(code);
                const MixedCode back = quantizer.deserialize(bytes);
                roundtrip[i] = bytes.size() == quantizer.serialized_bytes() &&
                               back.hi_code == code.hi_code && back.lo_code == code.lo_code &&
                               back.hi_scale == code.hi_scale && back.lo_scale == code.lo_scale;
                const std::vector<double> rec = quantizer.reconstruct(back);
                double e = 0.0;
                for (size_t j = 0; j < x.size(); ++j) {
                    e += (x[j] - rec[j]) * (x[j] - rec[j]);
                }
                err[i] = e;
            });
            CompensatedSum s;
            for (double e : err) {
                s.add(e);
            }
            const double mse = s.value() / static_cast<double>(keys.n);
            const double eff = effective_bitwidth(split, hl[0], hl[1], 32);
            const size_t numerator =
                split.outlier_idx.size() * hl[0] + split.regular_idx.size() * hl[1] + 32;
            const std::string tag = cname + "/" + std::to_string(hl[0]) + "-" + std::to_string(hl[1]);
            r.rows.push_back({cname, std::to_string(hl[0]), std::to_string(hl[1]),
                              fmt(split.outlier_idx.size()), fmt(eff),
                              fmt(quantizer.serialized_bytes()), fmt(mse)});
            r.checks.push_back({"bit_accounting/" + tag,
                                quantizer.serialized_bytes() == (numerator + 7) / 8 &&
                                    eff * keys.dim == static_cast<double>(numerator),
                                "bytes=" + fmt(quantizer.serialized_bytes()) +
                                    " effective=" + fmt(eff)});
            r.checks.push_back({"serialize_roundtrip/" + tag,
                                std::all_of(roundtrip.begin(), roundtrip.end(), [](char c) { return c != 0; }),
                                std::to_string(keys.n) + " vectors"});
            results.push_back({hl[0], hl[1], mse});
        }
        bool ordered = true;
        std::string detail;
        for (const auto& a : results) {
            for (const auto& b : results) {
                if (a.hi >= b.hi && a.lo >= b.lo && a.mse > b.mse) {
                    ordered = false;
                }
            }
            detail += std::to_string(a.hi) + "-" + std::to_string(a.lo) + ":" + fmt(a.mse) + " ";
        }
        r.checks.push_back({"mse_order/" + cname, ordered, detail});
    }
    return r;
}

using Runner = ExperimentResult (*)(const json&, unsigned);

struct Entry {
    const char* name;
    json (*defaults)();
    Runner run;
};

const std::vector<Entry>&
registry() {
    static const std::vector<Entry> entries = {
        {"codebook", codebook_defaults, run_codebook},
        {"quantize", quantize_defaults, run_quantize},
        {"eval-ip", eval_ip_defaults, run_eval_ip},
        {"eval-recall", eval_recall_defaults, run_eval_recall},
        {"bench-time", bench_defaults, run_bench},
        {"mixed", mixed_defaults, run_mixed},
    };
    return entries;
}

const Entry&
lookup(const std::string& name) {
    for (const auto& e : registry()) {
        if (name == e.name) {
            return e;
        }
    }
    throw_invalid("unknown experiment '" + name + "'");
}

}  // namespace

std::string
format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

const char*
git_describe() {
    return RQKIT_GIT_DESCRIBE;
}

bool
ExperimentResult::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json
ExperimentResult::to_json() const {
    json checks_json = json::array();
    for (const auto& c : checks) {
        checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    return {{"experiment", experiment},
            {"config", config},
            {"git_describe", git_describe()},
            {"csv", {{"header", header}, {"rows", rows}}},
            {"checks", checks_json},
            {"all_passed", all_passed()},
            {"extra", extra}};
}

std::string
ExperimentResult::to_csv() const {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << "\n";
    }
    return out.str();
}

std::vector<std::string>
experiment_names() {
    std::vector<std::string> out;
    for (const auto& e : registry()) {
        out.emplace_back(e.name);
    }
    return out;
}

json
default_config(const std::string& experiment) {
    return lookup(experiment).defaults();
}

json
resolve_config(const std::string& experiment, const json& overrides) {
    json cfg = default_config(experiment);
    if (overrides.is_null()) {
        return cfg;
    }
    if (!overrides.is_object()) {
        throw_invalid("experiment config must be a JSON object");
    }
    for (const auto& [key, value] : overrides.items()) {
        if (key == "experiment") {
            if (value != experiment) {
                throw_invalid("config is for experiment '" + value.dump() + "', not '" +
                              experiment + "'");
            }
            continue;
        }
        if (!cfg.contains(key)) {
            throw_invalid("unknown config key '" + key + "' for " + experiment);
        }
        if (cfg[key].is_object() && value.is_object()) {
            for (const auto& [k2, v2] : value.items()) {
                cfg[key][k2] = v2;
            }
        } else {
            cfg[key] = value;
        }
    }
    return cfg;
}

ExperimentResult
run_experiment(const std::string& experiment, const json& overrides, unsigned threads) {
    const Entry& entry = lookup(experiment);
    json cfg = resolve_config(experiment, overrides);
    try {
        ExperimentResult r = entry.run(cfg, std::max(1U, threads));
        r.experiment = experiment;
        cfg["experiment"] = experiment;
        r.config = std::move(cfg);
        return r;
    } catch (const json::exception& e) {
        throw_invalid(std::string("bad config value: ") + e.what());
    }
}

}  // namespace rqkit
