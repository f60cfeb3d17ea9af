#include "semaug/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "semaug/coco.hpp"
#include "semaug/embedding.hpp"

namespace semaug {

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::optional<uint64_t> seed;
    std::optional<double> ratio;
    std::optional<std::string> backend;
    std::optional<std::string> out;
    std::vector<std::string> datasets;
    std::optional<std::string> embeddings;
    std::vector<std::string> positional;
};

/// Parse errors in input data; exit 3.
class ParseFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

GenerationSettings settings_from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("generation must be an object");
    GenerationSettings s;
    for (auto& [key, value] : j.items()) {
        if (key == "width") s.width = value.get<int>();
        else if (key == "height") s.height = value.get<int>();
        else if (key == "steps") s.steps = value.get<int>();
        else if (key == "guidance_scale") s.guidance_scale = value.get<double>();
        else throw std::invalid_argument("unknown generation key '" + key + "'");
    }
    return s;
}

RunConfig load_config(const Flags& f) {
    RunConfig cfg;
    if (!f.config.empty()) {
        const fs::path path(f.config);
        if (!fs::is_regular_file(path)) {
            throw ConfigError("config file not found: " + path.string());
        }
        Json j;
        try {
            j = Json::parse(read_text_file(path));
        } catch (const Json::parse_error& e) {
            throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
        }
        try {
            cfg = RunConfig::from_json(j, path.parent_path());
        } catch (const std::exception& e) {
            throw ConfigError("config file " + path.string() + ": " + e.what());
        }
    }
    if (!f.datasets.empty()) {
        cfg.datasets.assign(f.datasets.begin(), f.datasets.end());
    }
    if (f.embeddings) cfg.embeddings = *f.embeddings;
    if (f.seed) cfg.seed = *f.seed;
    if (f.ratio) cfg.ratio = *f.ratio;
    if (f.out) cfg.out_dir = *f.out;
    if (f.backend) cfg.backend.kind = *f.backend == "remote" ? BackendKind::Remote : BackendKind::Mock;
    cfg.backend = with_env_overrides(cfg.backend);

    if (!(cfg.ratio >= 0.0) || !std::isfinite(cfg.ratio)) {
        throw ConfigError("ratio must be a finite number >= 0, got " + std::to_string(cfg.ratio));
    }
    try {
        cfg.augmentation.validate();
        cfg.backend.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

void require_dataset(const RunConfig& cfg) {
    if (cfg.datasets.empty()) throw ConfigError("no dataset given (set \"dataset\" in the config or pass --dataset)");
    for (const auto& p : cfg.datasets) {
        if (!fs::is_regular_file(p)) throw ConfigError("dataset file not found: " + p.string());
    }
}

void require_embeddings(const RunConfig& cfg) {
    if (cfg.embeddings.empty()) {
        throw ConfigError("no embeddings file given (set \"embeddings\" in the config or pass --embeddings)");
    }
    if (!fs::is_regular_file(cfg.embeddings)) {
        throw ConfigError("embeddings file not found: " + cfg.embeddings.string());
    }
}

Dataset load_dataset_files(const std::vector<fs::path>& paths) {
    std::vector<std::string> raws;
    for (const auto& p : paths) raws.push_back(read_text_file(p));
    try {
        return parse_dataset_documents(raws);
    } catch (const CocoError& e) {
        std::string where = paths.size() == 1 ? paths.front().string() : std::to_string(paths.size()) + " files";
        throw ParseFailure("cannot parse dataset (" + where + "): " + e.what());
    }
}

EmbeddingTable load_embedding_file(const fs::path& path) {
    std::ifstream in(path);
    try {
        return load_embeddings(in);
    } catch (const EmbeddingError& e) {
        throw ParseFailure("cannot parse embeddings " + path.string() + ": " + e.what());
    }
}

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::vector<GenerationJob> plan(const RunConfig& cfg, const Dataset& d, std::ostream& out) {
    const EmbeddingTable table = load_embedding_file(cfg.embeddings);
    std::vector<std::string> warnings;
    auto jobs = plan_augmentation(d, table, cfg.augmentation, cfg.ratio, cfg.seed, cfg.generation, &warnings);
    for (const auto& w : warnings) out << "warning: " << w << '\n';
    return jobs;
}

int cmd_augment(const RunConfig& cfg, std::ostream& out) {
    require_dataset(cfg);
    require_embeddings(cfg);
    const Dataset d = load_dataset_files(cfg.datasets);
    const auto jobs = plan(cfg, d, out);

    Json list = Json::array();
    for (const auto& job : jobs) list.push_back(job.augmented.to_json());
    ensure_out_dir(cfg.out_dir);
    const fs::path path = cfg.out_dir / "augmented_captions.json";
    write_text_file(path, list.dump(1) + "\n");
    out << "planned " << jobs.size() << " augmented captions from " << d.images.size() << " images -> "
        << path.string() << '\n';
    return kExitOk;
}

int cmd_build(const RunConfig& cfg, std::ostream& out) {
    require_dataset(cfg);
    require_embeddings(cfg);
    const Dataset d = load_dataset_files(cfg.datasets);
    const auto jobs = plan(cfg, d, out);
    ensure_out_dir(cfg.out_dir);

    const BuildResult built = build_augmented_dataset(d, jobs, cfg.backend, cfg.out_dir);
    // Failed jobs leave the build short of the ratio; mix what was produced.
    const MixManifest manifest = mix(d, built.augmented, cfg.ratio, cfg.seed, ShortfallPolicy::Tolerate);
    write_text_file(cfg.out_dir / "manifest.json", manifest.to_json().dump(1) + "\n");
    const StatsReport report = stats(manifest);
    write_text_file(cfg.out_dir / "stats.json", report.to_json().dump(1) + "\n");

    out << "generated " << built.augmented.images.size() << " of " << jobs.size() << " images";
    if (!built.failures.empty()) {
        out << " (" << built.failures.size() << " failed, see " << (cfg.out_dir / "failures.json").string() << ")";
    }
    out << '\n' << report.summary(d.taxonomy);
    return kExitOk;
}

int cmd_mix(const RunConfig& cfg, std::ostream& out) {
    require_dataset(cfg);
    const fs::path aug_path = cfg.out_dir / "annotations.json";
    if (!fs::is_regular_file(aug_path)) {
        throw ConfigError("augmented annotations not found: " + aug_path.string() + " (run build first)");
    }
    const Dataset d = load_dataset_files(cfg.datasets);
    const Dataset aug = load_dataset_files({aug_path});
    MixManifest manifest;
    try {
        manifest = mix(d, aug, cfg.ratio, cfg.seed);
    } catch (const BuildError& e) {
        throw ConfigError(e.what());
    }
    const fs::path path = cfg.out_dir / "manifest.json";
    write_text_file(path, manifest.to_json().dump(1) + "\n");
    out << "wrote " << manifest.entries.size() << " entries -> " << path.string() << '\n';
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg, const std::vector<std::string>& positional, std::ostream& out) {
    std::vector<fs::path> paths(positional.begin(), positional.end());
    if (paths.empty()) paths = cfg.datasets;
    if (paths.empty()) throw ConfigError("validate: no annotation files given");

    bool parse_failed = false;
    std::size_t total = 0;
    for (const auto& p : paths) {
        if (!fs::is_regular_file(p)) throw ConfigError("annotation file not found: " + p.string());
        ValidationReport report;
        try {
            report = validate(parse_dataset_unchecked(read_text_file(p)));
        } catch (const CocoError& e) {
            out << p.string() << ": parse error: " << e.what() << '\n';
            parse_failed = true;
            continue;
        }
        out << p.string() << ": " << report.size() << " violation(s)\n";
        for (const auto& v : report) {
            out << "  " << to_string(v.kind) << ' ' << v.subject << ' ' << v.id;
            if (!v.detail.empty()) out << ": " << v.detail;
            out << '\n';
        }
        total += report.size();
    }
    if (parse_failed) return kExitParse;
    return total == 0 ? kExitOk : kExitViolations;
}

int cmd_stats(const RunConfig& cfg, const std::vector<std::string>& positional, std::ostream& out) {
    const fs::path path = positional.empty() ? cfg.out_dir / "manifest.json" : fs::path(positional.front());
    if (!fs::is_regular_file(path)) throw ConfigError("manifest not found: " + path.string());
    MixManifest manifest;
    try {
        manifest = MixManifest::from_json(Json::parse(read_text_file(path)));
    } catch (const Json::parse_error& e) {
        throw ParseFailure("cannot parse manifest " + path.string() + ": " + e.what());
    } catch (const BuildError& e) {
        throw ParseFailure("cannot parse manifest " + path.string() + ": " + e.what());
    }
    // Category names are a nicety; use the dataset's taxonomy when it is at hand.
    std::vector<Category> taxonomy;
    if (!cfg.datasets.empty() && std::all_of(cfg.datasets.begin(), cfg.datasets.end(),
                                             [](const fs::path& p) { return fs::is_regular_file(p); })) {
        taxonomy = load_dataset_files(cfg.datasets).taxonomy;
    }
    out << stats(manifest).summary(taxonomy);
    return kExitOk;
}

void add_common_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--seed", f.seed, "run seed");
    cmd->add_option("--ratio", f.ratio, "augmented images per original image");
    cmd->add_option("--backend", f.backend, "generation backend")->check(CLI::IsMember({"mock", "remote"}));
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--dataset", f.datasets, "COCO annotation file(s); overrides the config");
    cmd->add_option("--embeddings", f.embeddings, "word vector file; overrides the config");
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    RunConfig cfg;
    for (auto& [key, value] : j.items()) {
        try {
            if (key == "dataset") {
                if (value.is_string()) {
                    cfg.datasets = {resolve(base_dir, value.get<std::string>())};
                } else {
                    cfg.datasets.clear();
                    for (const auto& p : value) cfg.datasets.push_back(resolve(base_dir, p.get<std::string>()));
                }
            } else if (key == "embeddings") {
                cfg.embeddings = resolve(base_dir, value.get<std::string>());
            } else if (key == "out_dir") {
                cfg.out_dir = resolve(base_dir, value.get<std::string>());
            } else if (key == "ratio") {
                cfg.ratio = value.get<double>();
            } else if (key == "seed") {
                cfg.seed = value.get<uint64_t>();
            } else if (key == "augmentation") {
                cfg.augmentation = AugmentationConfig::from_json(value);
            } else if (key == "backend") {
                cfg.backend = BackendConfig::from_json(value);
            } else if (key == "generation") {
                cfg.generation = settings_from_json(value);
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        } catch (const Json::exception& e) {
            throw std::invalid_argument(key + ": " + e.what());
        }
    }
    return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"semantic caption augmentation and dataset builder", "semaug"};
    app.require_subcommand(1);

    Flags f;
    auto* augment = app.add_subcommand("augment", "plan augmented captions (no images)");
    auto* build = app.add_subcommand("build", "plan, generate images, mix and report");
    auto* mixer = app.add_subcommand("mix", "mix an existing build with the original dataset");
    auto* validator = app.add_subcommand("validate", "validate COCO annotation files");
    auto* stat = app.add_subcommand("stats", "summarize a mix manifest");
    for (auto* cmd : {augment, build, mixer, validator, stat}) add_common_flags(cmd, f);
    validator->add_option("files", f.positional, "annotation files");
    stat->add_option("manifest", f.positional, "manifest file (default: <out>/manifest.json)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const RunConfig cfg = load_config(f);
        if (augment->parsed()) return cmd_augment(cfg, out);
        if (build->parsed()) return cmd_build(cfg, out);
        if (mixer->parsed()) return cmd_mix(cfg, out);
        if (validator->parsed()) return cmd_validate(cfg, f.positional, out);
        return cmd_stats(cfg, f.positional, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const GenerationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitGeneration;
    } catch (const BuildError& e) {
        err << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case BuildErrorKind::AllJobsFailed: return kExitGeneration;
            case BuildErrorKind::NoCaptions: return kExitParse;
            default: return kExitConfig;
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace semaug
