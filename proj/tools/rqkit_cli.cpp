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


#include <rqkit/rqkit.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using nlohmann::json;

namespace {

constexpr int EXIT_INVALID = 2;
constexpr int EXIT_FORMAT = 3;
constexpr int EXIT_CHECK_FAILED = 4;

enum class Kind { INT, DOUBLE, STRING, BOOL, INT_LIST, STRING_LIST };

struct Flag {
    const char* name;  // without leading dashes
    const char* key;   // config key
    Kind kind;
    const char* help;
};

struct Subcommand {
    const char* name;
    const char* help;
    std::vector<Flag> flags;
};

const std::vector<Flag> COMMON_CODEC = {
    {"rotation", "rotation", Kind::STRING, "dense or fast"},
    {"rounds", "rounds", Kind::INT, "fast rotation rounds"},
    {"seed", "seed", Kind::INT, "base seed"},
    {"cache-dir", "cache_dir", Kind::STRING, "Lloyd-Max codebook cache directory"},
};

std::vector<Flag>
with_common(std::vector<Flag> flags) {
    flags.insert(flags.end(), COMMON_CODEC.begin(), COMMON_CODEC.end());
    return flags;
}

const std::vector<Subcommand>&
subcommands() {
    static const std::vector<Subcommand> cmds = {
        {"codebook", "Build and cache Lloyd-Max codebooks",
         {{"dims", "dims", Kind::INT_LIST, "comma-separated dimensions"},
          {"bits", "bits", Kind::INT_LIST, "comma-separated bit-widths"},
          {"cache-dir", "cache_dir", Kind::STRING, "codebook cache directory"}}},
        {"quantize", "Quantize a dataset and write a code file",
         with_common({{"input", "input", Kind::STRING, "fvecs or MATF file (default: synthetic)"},
                      {"n", "n", Kind::INT, "synthetic vector count"},
                      {"dim", "dim", Kind::INT, "synthetic dimension"},
                      {"distribution", "distribution", Kind::STRING, "gaussian or unit-sphere"},
                      {"method", "method", Kind::STRING, "rabitq-prod, rabitq-mse, tq-prod, tq-mse"},
                      {"bits", "bits", Kind::INT, "bits per coordinate"},
                      {"codes", "codes_path", Kind::STRING, "output code file"}})},
        {"eval-ip", "Inner-product error distributions",
         with_common({{"dim", "dim", Kind::INT, "dimension"},
                      {"pairs", "pairs", Kind::INT, "vector pairs"},
                      {"rotation-seeds", "rotation_seeds", Kind::INT, "rotation draws"},
                      {"bits", "bits", Kind::INT_LIST, "comma-separated bit-widths"},
                      {"methods", "methods", Kind::STRING_LIST, "comma-separated methods"}})},
        {"eval-recall", "Recall@1@k of quantized inner-product search",
         with_common({{"base", "base_path", Kind::STRING, "base vectors (default: synthetic)"},
                      {"queries-file", "query_path", Kind::STRING, "query vectors"},
                      {"n", "n", Kind::INT, "synthetic base size"},
                      {"dim", "dim", Kind::INT, "synthetic dimension"},
                      {"queries", "queries", Kind::INT, "synthetic query count"},
                      {"bits", "bits", Kind::INT, "bits per coordinate"},
                      {"runs", "runs", Kind::INT, "runs with distinct rotation seeds"},
                      {"methods", "methods", Kind::STRING_LIST, "comma-separated methods"},
                      {"k-values", "k_values", Kind::INT_LIST, "comma-separated k values"},
                      {"min-recall", "min_recall", Kind::DOUBLE, "recall required at the largest k"}})},
        {"bench-time", "Wall-clock quantization time, rotation included",
         with_common({{"input", "input", Kind::STRING, "fvecs or MATF file (default: synthetic)"},
                      {"n", "n", Kind::INT, "synthetic vector count"},
                      {"dim", "dim", Kind::INT, "synthetic dimension"},
                      {"bits", "bits", Kind::INT, "bits per coordinate"},
                      {"methods", "methods", Kind::STRING_LIST, "comma-separated methods"},
                      {"rotations", "rotations", Kind::STRING_LIST, "comma-separated rotations"},
                      {"repeats", "repeats", Kind::INT, "timed repeats"}})},
        {"mixed", "Outlier-aware mixed-bitwidth quantization",
         {{"keys", "keys_path", Kind::STRING, "key matrix (default: synthetic)"},
          {"head-dim", "head_dim", Kind::INT, "synthetic head dimension"},
          {"vectors", "vectors", Kind::INT, "synthetic vector count"},
          {"outlier-count", "outlier_count", Kind::INT, "channels kept at hi-bits"},
          {"no-rotate", "rotate", Kind::BOOL, "keep sub-vectors in their native basis"},
          {"seed", "seed", Kind::INT, "base seed"},
          {"cache-dir", "cache_dir", Kind::STRING, "codebook cache directory"}}},
    };
    return cmds;
}

std::vector<std::string>
split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

json
convert(const Flag& f, const std::string& raw) {
    switch (f.kind) {
        case Kind::INT:
            return json(std::stoull(raw));
        case Kind::DOUBLE:
            return json(std::stod(raw));
        case Kind::STRING:
            return json(raw);
        case Kind::BOOL:
            return json(false);
        case Kind::INT_LIST: {
            json arr = json::array();
            for (const auto& s : split_list(raw)) {
                arr.push_back(std::stoull(s));
            }
            return arr;
        }
        case Kind::STRING_LIST:
            return json(split_list(raw));
    }
    return json();
}

json
read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw CLI::ValidationError("--config", "cannot open " + path);
    }
    json doc = json::parse(in);
    if (doc.is_object() && doc.contains("config") && doc["config"].is_object()) {
        return doc["config"];
    }
    return doc;
}

void
write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << content;
}

std::string
csv_of(const json& csv) {
    std::ostringstream out;
    const auto& header = csv.at("header");
    for (size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i].get<std::string>();
    }
    out << "\n";
    for (const auto& row : csv.at("rows")) {
        for (size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i].get<std::string>();
        }
        out << "\n";
    }
    return out.str();
}

int
exit_code_for(rqk_status s) {
    switch (s) {
        case RQK_OK:
            return 0;
        case RQK_ERR_FORMAT:
            return EXIT_FORMAT;
        case RQK_ERR_INVALID_ARGUMENT:
        case RQK_ERR_DEGENERATE:
        case RQK_ERR_IO:
            return EXIT_INVALID;
        default:
            return 1;
    }
}

}  // namespace

int
main(int argc, char** argv) {
    CLI::App app{"rqkit: randomized scalar quantization experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rqk_version()));

    struct State {
        std::map<std::string, std::string> values;
        std::string config_path;
        std::string out = "";
        unsigned threads = 0;
        bool check = false;
        bool print_defaults = false;
        std::vector<std::string> sets;
        std::string hi_bits, lo_bits, codec;
    };
    std::map<std::string, State> states;
    std::map<std::string, CLI::App*> apps;

    for (const auto& cmd : subcommands()) {
        State& st = states[cmd.name];
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        apps[cmd.name] = sub;
        sub->add_option("--config", st.config_path, "JSON config file (its \"config\" key if present)");
        sub->add_option("--out", st.out, "output prefix for <out>.json and <out>.csv");
        sub->add_option("--threads", st.threads, "worker threads (default: available cores)");
        sub->add_flag("--assert", st.check, "exit 4 when any check fails");
        sub->add_flag("--print-defaults", st.print_defaults, "print the default config and exit");
        sub->add_option("--set", st.sets, "config override key=JSON-value (repeatable)");
        for (const auto& f : cmd.flags) {
            const std::string opt = std::string("--") + f.name;
            if (f.kind == Kind::BOOL) {
                sub->add_flag_callback(opt, [&st, f] { st.values[f.key] = "1"; }, f.help);
            } else {
                sub->add_option_function<std::string>(
                    opt, [&st, f](const std::string& v) { st.values[f.key] = v; }, f.help);
            }
        }
        if (std::string(cmd.name) == "mixed") {
            sub->add_option("--hi-bits", st.hi_bits, "bits for outlier channels");
            sub->add_option("--lo-bits", st.lo_bits, "bits for regular channels");
            sub->add_option("--codec", st.codec, "rabitq or tq-mse");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : EXIT_INVALID;
    }

    for (const auto& cmd : subcommands()) {
        CLI::App* sub = apps[cmd.name];
        if (!sub->parsed()) {
            continue;
        }
        State& st = states[cmd.name];
        if (st.print_defaults) {
            char* text = nullptr;
            const rqk_status s = rqk_experiment_default_config(cmd.name, &text);
            if (s != RQK_OK) {
                std::cerr << "error: " << rqk_last_error() << "\n";
                return exit_code_for(s);
            }
            std::cout << text << "\n";
            rqk_string_free(text);
            return 0;
        }
        json overrides = json::object();
        try {
            if (!st.config_path.empty()) {
                overrides = read_config_file(st.config_path);
                if (!overrides.is_object()) {
                    std::cerr << "error: config file must hold a JSON object\n";
                    return EXIT_FORMAT;
                }
            }
            for (const auto& f : cmd.flags) {
                auto it = st.values.find(f.key);
                if (it != st.values.end()) {
                    overrides[f.key] = convert(f, it->second);
                }
            }
            if (!st.hi_bits.empty() || !st.lo_bits.empty()) {
                if (st.hi_bits.empty() || st.lo_bits.empty()) {
                    std::cerr << "error: --hi-bits and --lo-bits go together\n";
                    return EXIT_INVALID;
                }
                overrides["configs"] = json::array({json::array({std::stoul(st.hi_bits), std::stoul(st.lo_bits)})});
            }
            if (!st.codec.empty()) {
                overrides["codecs"] = json::array({st.codec});
            }
            for (const auto& kv : st.sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0) {
                    std::cerr << "error: --set expects key=value\n";
                    return EXIT_INVALID;
                }
                const std::string key = kv.substr(0, eq);
                const std::string raw = kv.substr(eq + 1);
                json value = json::parse(raw, nullptr, false);
                overrides[key] = value.is_discarded() ? json(raw) : value;
            }
        } catch (const json::parse_error& e) {
            std::cerr << "error: malformed JSON: " << e.what() << "\n";
            return EXIT_FORMAT;
        } catch (const CLI::ValidationError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return EXIT_INVALID;
        } catch (const std::exception& e) {
            std::cerr << "error: bad flag value: " << e.what() << "\n";
            return EXIT_INVALID;
        }

        const unsigned threads = st.threads == 0 ? rqk_default_threads() : st.threads;
        char* text = nullptr;
        const rqk_status s = rqk_experiment_run(cmd.name, overrides.dump().c_str(), threads, &text);
        if (s != RQK_OK) {
            std::cerr << "error: " << rqk_last_error() << "\n";
            return exit_code_for(s);
        }
        const json result = json::parse(text);
        rqk_string_free(text);

        const std::string prefix = st.out.empty() ? std::string("rqkit_") + cmd.name : st.out;
        try {
            write_file(prefix + ".json", result.dump(2) + "\n");
            write_file(prefix + ".csv", csv_of(result.at("csv")));
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return EXIT_INVALID;
        }

        std::cout << "config: " << result.at("config").dump() << "\n";
        std::cout << "git: " << result.at("git_describe").get<std::string>() << "\n";
        std::cout << csv_of(result.at("csv"));
        bool all_ok = true;
        for (const auto& c : result.at("checks")) {
            const bool ok = c.at("passed").get<bool>();
            all_ok = all_ok && ok;
            std::cout << (ok ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << "  "
                      << c.at("detail").get<std::string>() << "\n";
        }
        std::cout << "wrote " << prefix << ".json and " << prefix << ".csv\n";
        if (st.check && !all_ok) {
            return EXIT_CHECK_FAILED;
        }
        return 0;
    }
    return EXIT_INVALID;
}
