// ihlab - induction-head repetition laboratory CLI.
//
// Subcommands: wire, train, detect, headscores, toxicity, sweep, ablate-c,
// eval, report. Exit codes: 0 success, 2 usage error, 3 data/model error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ihlab/checkpoint.hpp"
#include "ihlab/copy_task.hpp"
#include "ihlab/descale.hpp"
#include "ihlab/patching.hpp"
#include "ihlab/report.hpp"
#include "ihlab/sweep.hpp"
#include "ihlab/toxicity.hpp"
#include "ihlab/training.hpp"
#include "ihlab/wiring.hpp"

namespace {

using namespace ihlab;
using nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << content;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ModelConfig config_from_json(const ordered_json& j) {
    ModelConfig cfg;
    cfg.n_layers = j.at("n_layers").get<std::size_t>();
    cfg.n_heads = j.at("n_heads").get<std::size_t>();
    cfg.d_model = j.at("d_model").get<std::size_t>();
    cfg.d_head = j.at("d_head").get<std::size_t>();
    cfg.vocab_size = j.at("vocab_size").get<std::size_t>();
    cfg.max_seq = j.at("max_seq").get<std::size_t>();
    cfg.validate();
    return cfg;
}

ordered_json config_to_json(const ModelConfig& cfg) {
    return {{"n_layers", cfg.n_layers}, {"n_heads", cfg.n_heads},
            {"d_model", cfg.d_model},   {"d_head", cfg.d_head},
            {"vocab_size", cfg.vocab_size}, {"max_seq", cfg.max_seq}};
}

TrainSpec trainspec_from_json(const ordered_json& j) {
    TrainSpec s;
    s.seq_len = j.value("seq_len", s.seq_len);
    s.seg_min = j.value("seg_min", s.seg_min);
    s.seg_max = j.value("seg_max", s.seg_max);
    s.rep_min = j.value("rep_min", s.rep_min);
    s.rep_max = j.value("rep_max", s.rep_max);
    s.batch_size = j.value("batch_size", s.batch_size);
    s.steps = j.value("steps", s.steps);
    s.learning_rate = j.value("learning_rate", s.learning_rate);
    s.warmup_steps = j.value("warmup_steps", s.warmup_steps);
    s.adam_beta1 = j.value("adam_beta1", s.adam_beta1);
    s.adam_beta2 = j.value("adam_beta2", s.adam_beta2);
    s.adam_eps = j.value("adam_eps", s.adam_eps);
    s.init_std = j.value("init_std", s.init_std);
    s.seed = j.value("seed", s.seed);
    return s;
}

ordered_json trainspec_to_json(const TrainSpec& s) {
    return {{"seq_len", s.seq_len},       {"seg_min", s.seg_min},
            {"seg_max", s.seg_max},       {"rep_min", s.rep_min},
            {"rep_max", s.rep_max},       {"batch_size", s.batch_size},
            {"steps", s.steps},           {"learning_rate", s.learning_rate},
            {"warmup_steps", s.warmup_steps}, {"adam_beta1", s.adam_beta1},
            {"adam_beta2", s.adam_beta2}, {"adam_eps", s.adam_eps},
            {"init_std", s.init_std},     {"seed", s.seed}};
}

InductionHeadSet ind_set_from_file(const std::string& path) {
    const ordered_json j = ordered_json::parse(read_text(path));
    InductionHeadSet set;
    for (const auto& pair : j)
        set.heads.push_back(HeadId{pair.at(0).get<std::size_t>(), pair.at(1).get<std::size_t>()});
    if (set.heads.empty()) throw std::runtime_error("induction set file is empty: " + path);
    return set;
}

ModelWeights load_model(const std::string& path) {
    if (path.empty()) throw std::runtime_error("--model <checkpoint> is required");
    return load_checkpoint(path).weights;
}

std::vector<CopyTaskInstance> make_trials(const ModelConfig& cfg, std::size_t n,
                                          std::size_t L, RngStream& rng) {
    std::vector<CopyTaskInstance> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(make_copy_instance(cfg.vocab_size, L, rng));
    return out;
}

std::vector<TokenSeq> make_eval_set(const ModelConfig& cfg, const TrainSpec& spec,
                                    std::uint64_t seed, std::size_t n) {
    RngStream rng = RngStream::derive(seed, "heldout-eval");
    std::vector<TokenSeq> out(n);
    for (auto& seq : out) seq = make_train_sequence(cfg, spec, rng);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"induction-head repetition laboratory"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string config_path, model_path, out_dir = "out", policy_spec = "id";
    bool print_config = false;
    app.add_option("--seed", seed, "master seed");
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--model", model_path, "model checkpoint");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--policy", policy_spec, "scaling policy: log:c=2 | lin | const:k=0.5 | id");
    app.add_flag("--print-config", print_config, "print resolved defaults and exit");

    // wire
    auto* wire = app.add_subcommand("wire", "build the hand-wired induction model");
    std::size_t w_vocab = 24, w_max_seq = 32, w_heads = 4, w_layers = 2;
    double w_sharpness = 20.0;
    wire->add_option("--vocab", w_vocab);
    wire->add_option("--max-seq", w_max_seq);
    wire->add_option("--heads", w_heads);
    wire->add_option("--layers", w_layers);
    wire->add_option("--sharpness", w_sharpness);

    // train
    auto* train = app.add_subcommand("train", "train the toy model (config required)");

    // detect
    auto* detect = app.add_subcommand("detect", "activation-patching induction head detection");
    std::size_t d_trials = 100, d_len = 16;
    double d_p = 2.0;
    bool d_dump_trials = false;
    detect->add_option("--trials", d_trials, "copy-task instances");
    detect->add_option("--L", d_len, "copy-task L");
    detect->add_option("--p", d_p, "top-percent head selection");
    detect->add_flag("--dump-trials", d_dump_trials, "dump copy-task instances as JSON lines");

    // headscores
    auto* headscores = app.add_subcommand("headscores", "prefix-match and copy-boost scores");
    std::size_t hs_trials = 20, hs_len = 12;
    headscores->add_option("--trials", hs_trials);
    headscores->add_option("--len", hs_len, "pattern sequence length");

    // toxicity
    auto* tox = app.add_subcommand("toxicity", "tau/entropy trace during generation");
    std::string t_ind_path, t_method = "causal";
    std::size_t t_k = 8, t_pattern_len = 2, t_steps = 32;
    double t_gamma = 0.65;
    tox->add_option("--ind", t_ind_path, "induction set JSON (from detect)");
    tox->add_option("--k", t_k, "seeded pattern copies");
    tox->add_option("--pattern-len", t_pattern_len);
    tox->add_option("--steps", t_steps);
    tox->add_option("--gamma", t_gamma);
    tox->add_option("--method", t_method, "causal | norm");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "repetition-curse sweep and report");
    std::string s_ind_path;
    std::size_t s_trials = 3, s_pattern_len = 2;
    std::vector<std::size_t> s_k;
    sweep->add_option("--ind", s_ind_path, "induction set JSON");
    sweep->add_option("--trials", s_trials);
    sweep->add_option("--pattern-len", s_pattern_len);
    sweep->add_option("--k", s_k, "target repetition counts");

    // ablate-c
    auto* ablate = app.add_subcommand("ablate-c", "ablation over the log policy constant c");
    std::string a_ind_path;
    std::vector<double> a_c = {1.0, 2.0, 10.0};
    std::size_t a_k = 64, a_trials = 5;
    ablate->add_option("--ind", a_ind_path, "induction set JSON");
    ablate->add_option("--c", a_c, "c grid");
    ablate->add_option("--k", a_k, "probe repetition target");
    ablate->add_option("--trials", a_trials);

    // eval
    auto* eval = app.add_subcommand("eval", "held-out cross-entropy under a policy");
    std::string e_ind_path;
    std::size_t e_n = 32;
    eval->add_option("--ind", e_ind_path, "induction set JSON");
    eval->add_option("--n", e_n, "held-out sequences");

    // report
    auto* report = app.add_subcommand("report", "re-run a sweep from summary.json");
    std::string r_summary;
    std::string r_ind_path;
    report->add_option("--from", r_summary, "existing summary.json")->required();
    report->add_option("--ind", r_ind_path, "induction set JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (print_config) {
            ordered_json j;
            j["seed"] = seed;
            j["policy"] = policy_spec;
            j["out"] = out_dir;
            j["train_defaults"] = trainspec_to_json(TrainSpec{});
            ModelConfig dflt{2, 4, 64, 16, 128, 128};
            j["model_defaults"] = config_to_json(dflt);
            std::cout << j.dump(1) << "\n";
            return 0;
        }

        const ScalingPolicy policy = ScalingPolicy::parse(policy_spec);

        if (*wire) {
            ModelConfig cfg = wired_config(w_vocab, w_max_seq, w_heads, w_layers);
            ModelWeights w = wire_induction_model(cfg, w_sharpness);
            Provenance prov;
            prov.kind = "wired";
            prov.seed = seed;
            std::filesystem::create_directories(out_dir);
            const std::string path = out_dir + "/wired.ckpt.json";
            save_checkpoint(w, prov, path);
            std::cout << "wrote " << path << "\n";
        } else if (*train) {
            if (config_path.empty()) throw std::runtime_error("train: --config <file> required");
            const ordered_json j = ordered_json::parse(read_text(config_path));
            ModelConfig cfg = config_from_json(j.at("model"));
            TrainSpec spec = trainspec_from_json(j.at("train"));
            if (seed != 0) spec.seed = seed;
            TrainResult res = train_toy_model(cfg, spec);
            Provenance prov;
            prov.kind = "trained";
            prov.seed = spec.seed;
            prov.train_steps = spec.steps;
            std::filesystem::create_directories(out_dir);
            save_checkpoint(res.weights, prov, out_dir + "/trained.ckpt.json");
            std::ostringstream trace;
            trace << "step,loss\n";
            for (std::size_t i = 0; i < res.loss_trace.size(); ++i)
                trace << (i + 1) << ',' << res.loss_trace[i] << '\n';
            write_text(out_dir + "/loss_trace.csv", trace.str());
            std::cout << "final loss " << res.loss_trace.back() << "; wrote " << out_dir
                      << "/trained.ckpt.json\n";
        } else if (*detect) {
            ModelWeights w = load_model(model_path);
            RngStream rng = RngStream::derive(seed, "detect");
            auto trials = make_trials(w.cfg, d_trials, d_len, rng);
            if (d_dump_trials) {
                std::ostringstream dump;
                for (const auto& t : trials) dump << t.to_json_line() << '\n';
                write_text(out_dir + "/trials.jsonl", dump.str());
            }
            RngStream corr_rng = RngStream::derive(seed, "detect-corrupt");
            ImportanceMap map = run_patch_protocol(w, trials, corr_rng);
            InductionHeadSet set = identify_induction_heads(map, d_p);
            std::filesystem::create_directories(out_dir);
            write_text(out_dir + "/importance.csv", map.to_csv());
            write_text(out_dir + "/induction_set.json", set.to_json() + "\n");
            std::cout << "top head: layer " << set.heads[0].layer << " head "
                      << set.heads[0].head << " (importance "
                      << map.importance_of(set.heads[0]) << ")\n";
        } else if (*headscores) {
            ModelWeights w = load_model(model_path);
            RngStream rng = RngStream::derive(seed, "headscores");
            std::ostringstream csv;
            csv << "layer,head,p_match,copy_boost\n";
            for (std::size_t l = 0; l < w.cfg.n_layers; ++l) {
                for (std::size_t h = 0; h < w.cfg.n_heads; ++h) {
                    double pm = 0, cb = 0;
                    RngStream hrng = rng.child("head-" + std::to_string(l) + "-" + std::to_string(h));
                    for (std::size_t i = 0; i < hs_trials; ++i) {
                        PatternSeq seq = make_pattern_seq(w.cfg.vocab_size, hs_len, hrng);
                        pm += prefix_match_score(w, seq, HeadId{l, h});
                        cb += copy_boost_score(w, seq, HeadId{l, h});
                    }
                    csv << l << ',' << h << ',' << pm / hs_trials << ',' << cb / hs_trials << '\n';
                }
            }
            std::filesystem::create_directories(out_dir);
            write_text(out_dir + "/headscores.csv", csv.str());
            std::cout << "wrote " << out_dir << "/headscores.csv\n";
        } else if (*tox) {
            ModelWeights w = load_model(model_path);
            ToxicityConfig cfg;
            cfg.gamma = t_gamma;
            if (!t_ind_path.empty()) {
                cfg.ind_set = ind_set_from_file(t_ind_path);
            } else {
                RngStream rng = RngStream::derive(seed, "detect");
                auto trials = make_trials(w.cfg, 50, 12, rng);
                RngStream corr_rng = RngStream::derive(seed, "detect-corrupt");
                cfg.ind_set = identify_induction_heads(run_patch_protocol(w, trials, corr_rng), 2.0);
            }
            RngStream prng = RngStream::derive(seed, "toxicity-pattern");
            TokenSeq pattern(t_pattern_len);
            for (auto& t : pattern) t = static_cast<Token>(prng.next_below(w.cfg.vocab_size));
            TokenSeq ctx;
            for (std::size_t r = 0; r < t_k; ++r)
                ctx.insert(ctx.end(), pattern.begin(), pattern.end());
            ToxicityTrace trace;
            if (t_method == "causal") {
                RngStream rng = RngStream::derive(seed, "toxicity-corrupt");
                trace = toxicity_causal_trace(w, ctx, t_steps, cfg, rng);
            } else if (t_method == "norm") {
                trace = toxicity_norm_trace(w, ctx, t_steps, cfg);
            } else {
                throw std::runtime_error("toxicity: --method must be causal or norm");
            }
            std::filesystem::create_directories(out_dir);
            write_text(out_dir + "/trace.csv", trace.to_csv());
            PropagationStats stats = check_propagation(trace, t_gamma);
            std::cout << "onset: " << (stats.onset ? std::to_string(*stats.onset) : "none")
                      << ", windowed-mean non-decreasing: "
                      << (stats.windowed_mean_nondecreasing ? "yes" : "no") << "\n";
        } else if (*sweep) {
            ModelWeights w = load_model(model_path);
            InductionHeadSet set;
            if (!s_ind_path.empty()) set = ind_set_from_file(s_ind_path);
            SweepSpec spec;
            if (!s_k.empty()) spec.k_values = s_k;
            spec.pattern_len = s_pattern_len;
            spec.trials = s_trials;
            spec.master_seed = seed;
            spec.policy = policy;
            SweepReport rep = run_repetition_sweep(w, spec, set);
            ReportFiles files = emit_report(rep, {}, out_dir);
            std::cout << "wrote " << files.csv_path << ", " << files.json_path << "\n";
        } else if (*ablate) {
            ModelWeights w = load_model(model_path);
            if (a_ind_path.empty()) throw std::runtime_error("ablate-c: --ind <file> required");
            CAblationSetup setup;
            setup.probe_k = a_k;
            setup.trials = a_trials;
            setup.seed = seed;
            setup.eval_set = make_eval_set(w.cfg, TrainSpec{}, seed, 8);
            auto rows = ablate_c(w, ind_set_from_file(a_ind_path), a_c, setup);
            std::ostringstream csv;
            csv << "c,median_achieved,ood_fraction,held_out_ce\n";
            for (const auto& r : rows)
                csv << r.c << ',' << r.median_achieved << ',' << r.ood_fraction << ','
                    << r.held_out_ce << '\n';
            std::filesystem::create_directories(out_dir);
            write_text(out_dir + "/ablate_c.csv", csv.str());
            std::cout << csv.str();
        } else if (*eval) {
            ModelWeights w = load_model(model_path);
            InductionHeadSet set;
            if (!e_ind_path.empty()) set = ind_set_from_file(e_ind_path);
            if (set.heads.empty() && policy.kind != ScalingPolicy::Kind::Identity)
                throw std::runtime_error("eval: non-identity policy needs --ind <file>");
            auto eval_set = make_eval_set(w.cfg, TrainSpec{}, seed, e_n);
            HeldOutCE ce = held_out_ce(w, policy, set, eval_set);
            ordered_json j;
            j["policy"] = policy.to_string();
            j["cross_entropy_nats"] = ce.cross_entropy_nats;
            j["perplexity"] = ce.perplexity;
            std::cout << j.dump(1) << "\n";
        } else if (*report) {
            ModelWeights w = load_model(model_path);
            InductionHeadSet set;
            if (!r_ind_path.empty()) set = ind_set_from_file(r_ind_path);
            const ordered_json j = ordered_json::parse(read_text(r_summary));
            SweepSpec spec;
            const auto& jc = j.at("config");
            spec.k_values = jc.at("k_values").get<std::vector<std::size_t>>();
            spec.pattern_len = jc.at("pattern_len").get<std::size_t>();
            spec.token_pool = jc.at("token_pool").get<std::vector<Token>>();
            spec.window = jc.at("window").get<std::size_t>();
            spec.policy = ScalingPolicy::parse(jc.at("policy").get<std::string>());
            spec.trials = jc.at("trials").get<std::size_t>();
            spec.master_seed = j.at("master_seed").get<std::uint64_t>();
            SweepReport rep = run_repetition_sweep(w, spec, set);
            ReportFiles files = emit_report(rep, {}, out_dir);
            std::cout << "wrote " << files.csv_path << ", " << files.json_path << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
