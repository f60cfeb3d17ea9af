#include "semaug/dataset_builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include "semaug/hash.hpp"

namespace semaug {

namespace fs = std::filesystem;

namespace {

std::string output_file_for(std::size_t ordinal) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "images/aug_%06zu.png", ordinal);
    return buf;
}

std::unordered_map<int64_t, std::vector<int64_t>> label_index(const Dataset& d) {
    std::unordered_map<int64_t, std::set<int64_t>> sets;
    for (const auto& l : d.labels) sets[l.image_id].insert(l.category_id);
    std::unordered_map<int64_t, std::vector<int64_t>> out;
    for (auto& [image, ids] : sets) out[image].assign(ids.begin(), ids.end());
    return out;
}

const char* source_name(EntrySource s) {
    return s == EntrySource::Original ? "original" : "augmented";
}

}  // namespace

std::string_view to_string(BuildErrorKind kind) {
    switch (kind) {
        case BuildErrorKind::InvalidRatio: return "InvalidRatio";
        case BuildErrorKind::NoCaptions: return "NoCaptions";
        case BuildErrorKind::OutputNotWritable: return "OutputNotWritable";
        case BuildErrorKind::AllJobsFailed: return "AllJobsFailed";
        case BuildErrorKind::RatioUnsatisfiable: return "RatioUnsatisfiable";
        case BuildErrorKind::IdCollision: return "IdCollision";
        case BuildErrorKind::MalformedManifest: return "MalformedManifest";
    }
    return "Unknown";
}

BuildError::BuildError(BuildErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

std::size_t augmented_count(double ratio, std::size_t n_images) {
    if (!std::isfinite(ratio) || ratio < 0.0) {
        throw BuildError(BuildErrorKind::InvalidRatio, "ratio must be a finite nonnegative number");
    }
    // 0.29 * 100 evaluates to 28.999999999999996; the nudge keeps floor() exact
    // for ratios written with a few decimals.
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n_images) + 1e-9));
}

uint64_t generation_seed(std::size_t ordinal, uint64_t run_seed) {
    return fnv1a64(std::to_string(ordinal) + ":" + std::to_string(run_seed));
}

std::vector<GenerationJob> plan_augmentation(const Dataset& input, const EmbeddingProvider& provider,
                                             const AugmentationConfig& cfg, double ratio, uint64_t run_seed,
                                             const GenerationSettings& settings, std::vector<std::string>* warnings) {
    cfg.validate();
    const std::size_t n_jobs = augmented_count(ratio, input.images.size());
    std::vector<GenerationJob> jobs;
    if (n_jobs == 0) {
        return jobs;
    }

    Dataset d = input;
    canonicalize(d);
    std::unordered_map<int64_t, std::vector<const CaptionAnnotation*>> captions_of;
    for (const auto& c : d.captions) captions_of[c.image_id].push_back(&c);
    const auto labels_of = label_index(d);

    std::unordered_map<int64_t, std::vector<Category>> categories_of;
    for (const auto& [image, ids] : labels_of) {
        for (int64_t id : ids) {
            if (const Category* c = find_category(d.taxonomy, id)) categories_of[image].push_back(*c);
        }
    }

    std::unordered_map<int64_t, ChoiceSource> image_streams;
    std::unordered_map<int64_t, ChoiceSource> caption_streams;
    std::set<int64_t> warned;
    std::size_t cursor = 0;
    const std::size_t n_images = d.images.size();

    jobs.reserve(n_jobs);
    while (jobs.size() < n_jobs) {
        // Find the next image (cyclically) that has captions.
        std::size_t tried = 0;
        while (tried < n_images && !captions_of.count(d.images[cursor % n_images].id)) {
            const int64_t id = d.images[cursor % n_images].id;
            if (warned.insert(id).second && warnings) {
                warnings->push_back("NoCaptionsForImage(" + std::to_string(id) + "): skipped");
            }
            ++cursor;
            ++tried;
        }
        if (tried == n_images) {
            throw BuildError(BuildErrorKind::NoCaptions, "no image in the dataset has a caption");
        }
        const ImageRecord& image = d.images[cursor % n_images];
        ++cursor;

        auto& image_stream =
            image_streams.try_emplace(image.id, ChoiceSource::for_record(run_seed, "image", image.id)).first->second;
        const auto& options = captions_of.at(image.id);
        const CaptionAnnotation& caption = *options[image_stream.next_index(options.size())];

        auto& caption_stream =
            caption_streams.try_emplace(caption.id, ChoiceSource::for_record(run_seed, "caption", caption.id))
                .first->second;
        static const std::vector<Category> kNoLabels;
        auto cats = categories_of.find(image.id);
        const auto& labels = cats == categories_of.end() ? kNoLabels : cats->second;

        GenerationJob job;
        job.ordinal = jobs.size();
        job.augmented = augment_caption(caption, labels, d.taxonomy, provider, cfg, caption_stream);
        job.request.prompt = job.augmented.text;
        job.request.seed = generation_seed(job.ordinal, run_seed);
        job.request.width = settings.width;
        job.request.height = settings.height;
        job.request.steps = settings.steps;
        job.request.guidance_scale = settings.guidance_scale;
        job.output_file = output_file_for(job.ordinal);
        jobs.push_back(std::move(job));
    }
    return jobs;
}

BuildResult build_augmented_dataset(const Dataset& original, std::span<const GenerationJob> jobs,
                                    const BackendConfig& backend, const fs::path& out_dir) {
    try {
        fs::create_directories(out_dir / "images");
    } catch (const fs::filesystem_error& e) {
        throw BuildError(BuildErrorKind::OutputNotWritable, e.what());
    }

    std::vector<GenerationRequest> requests;
    requests.reserve(jobs.size());
    for (const auto& job : jobs) requests.push_back(job.request);

    // Names are fixed per job, so concurrent workers never touch the same file.
    const auto slots = batch_generate(backend, requests, [&](std::size_t i, const BatchSlot& slot) {
        if (!slot.ok()) return;
        const fs::path path = out_dir / jobs[i].output_file;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        const auto& png = slot.result().image;
        f.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
        if (!f) {
            throw BuildError(BuildErrorKind::OutputNotWritable, "cannot write " + path.string());
        }
    });

    int64_t max_id = 0;
    for (const auto& img : original.images) max_id = std::max(max_id, img.id);

    BuildResult out;
    Dataset& aug = out.augmented;
    aug.taxonomy = original.taxonomy;
    aug.extra = {{"info", {{"description", "augmented captions with generated images"}}}};
    int64_t label_id = 1;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const GenerationJob& job = jobs[i];
        if (!slots[i].ok()) {
            const auto& err = slots[i].error();
            out.failures.push_back(
                {job.ordinal, job.output_file, job.request.prompt, std::string(to_string(err.kind())), err.what()});
            continue;
        }
        const int64_t image_id = max_id + static_cast<int64_t>(job.ordinal) + 1;
        ImageRecord rec{image_id, job.output_file, job.request.width, job.request.height, Json::object()};
        rec.extra["semaug"] = {{"ordinal", job.ordinal},
                               {"source_caption_id", job.augmented.source_caption_id},
                               {"source_image_id", job.augmented.source_image_id},
                               {"strategy", to_string(job.augmented.strategy)},
                               {"seed", job.request.seed}};
        aug.images.push_back(std::move(rec));
        aug.captions.push_back({static_cast<int64_t>(job.ordinal) + 1, image_id, job.augmented.text, Json::object()});
        for (int64_t cat : job.augmented.labels_after) {
            aug.labels.push_back({label_id++, image_id, cat, Json::object()});
        }
    }

    Json failures = Json::array();
    for (const auto& f : out.failures) {
        failures.push_back({{"ordinal", f.ordinal},
                            {"output_file", f.output_file},
                            {"prompt", f.prompt},
                            {"error", f.error_kind},
                            {"message", f.message}});
    }
    write_text_file(out_dir / "failures.json", failures.dump(1) + "\n");

    if (!jobs.empty() && out.failures.size() == jobs.size()) {
        throw BuildError(BuildErrorKind::AllJobsFailed,
                         "all " + std::to_string(jobs.size()) + " generation jobs failed; see failures.json");
    }

    const ValidationReport report = validate(aug);
    if (!report.empty()) {
        throw std::logic_error(std::string("augmented dataset failed validation: ") + CocoError(report.front()).what());
    }
    write_text_file(out_dir / "annotations.json", write_dataset(aug));
    return out;
}

// ---- mixing ----

Json MixManifest::to_json() const {
    Json list = Json::array();
    for (const auto& e : entries) {
        list.push_back({{"image_id", e.image_id},
                        {"image_file", e.image_file},
                        {"labels", e.labels},
                        {"source", source_name(e.source)},
                        {"strategy", e.strategy ? Json(to_string(*e.strategy)) : Json(nullptr)},
                        {"source_caption_id", e.source_caption_id ? Json(*e.source_caption_id) : Json(nullptr)}});
    }
    return {{"ratio", ratio}, {"run_seed", run_seed}, {"entries", list}};
}

MixManifest MixManifest::from_json(const Json& j) {
    MixManifest m;
    try {
        m.ratio = j.at("ratio").get<double>();
        m.run_seed = j.at("run_seed").get<uint64_t>();
        for (const auto& e : j.at("entries")) {
            ManifestEntry entry;
            entry.image_id = e.at("image_id").get<int64_t>();
            entry.image_file = e.at("image_file").get<std::string>();
            entry.labels = e.at("labels").get<std::vector<int64_t>>();
            const auto source = e.at("source").get<std::string>();
            if (source == "original") {
                entry.source = EntrySource::Original;
            } else if (source == "augmented") {
                entry.source = EntrySource::Augmented;
            } else {
                throw BuildError(BuildErrorKind::MalformedManifest, "unknown source '" + source + "'");
            }
            if (!e.at("strategy").is_null()) {
                entry.strategy = parse_strategy(e.at("strategy").get<std::string>());
                if (!entry.strategy) {
                    throw BuildError(BuildErrorKind::MalformedManifest, "unknown strategy in manifest");
                }
            }
            if (!e.at("source_caption_id").is_null()) {
                entry.source_caption_id = e.at("source_caption_id").get<int64_t>();
            }
            m.entries.push_back(std::move(entry));
        }
    } catch (const Json::exception& e) {
        throw BuildError(BuildErrorKind::MalformedManifest, e.what());
    }
    return m;
}

MixManifest mix(const Dataset& original, const Dataset& augmented, double ratio, uint64_t run_seed,
                ShortfallPolicy policy) {
    const std::size_t needed = augmented_count(ratio, original.images.size());

    std::vector<const ImageRecord*> aug_images;
    for (const auto& img : augmented.images) aug_images.push_back(&img);
    std::sort(aug_images.begin(), aug_images.end(), [](auto* a, auto* b) { return a->id < b->id; });
    if (aug_images.size() < needed && policy == ShortfallPolicy::Reject) {
        throw BuildError(BuildErrorKind::RatioUnsatisfiable,
                         "ratio " + std::to_string(ratio) + " needs " + std::to_string(needed) +
                             " augmented images, only " + std::to_string(aug_images.size()) + " available");
    }
    aug_images.resize(std::min(needed, aug_images.size()));

    MixManifest m;
    m.ratio = ratio;
    m.run_seed = run_seed;

    std::set<int64_t> ids;
    const auto original_labels = label_index(original);
    for (const auto& img : original.images) {
        ids.insert(img.id);
        auto it = original_labels.find(img.id);
        m.entries.push_back({img.id, img.file_name, it == original_labels.end() ? std::vector<int64_t>{} : it->second,
                             EntrySource::Original, std::nullopt, std::nullopt});
    }
    const auto aug_labels = label_index(augmented);
    for (const ImageRecord* img : aug_images) {
        if (!ids.insert(img->id).second) {
            throw BuildError(BuildErrorKind::IdCollision,
                             "augmented image id " + std::to_string(img->id) + " collides with an original image");
        }
        ManifestEntry e{img->id, img->file_name, {}, EntrySource::Augmented, std::nullopt, std::nullopt};
        if (auto it = aug_labels.find(img->id); it != aug_labels.end()) e.labels = it->second;
        if (auto prov = img->extra.find("semaug"); prov != img->extra.end() && prov->is_object()) {
            if (auto s = prov->find("strategy"); s != prov->end() && s->is_string()) {
                e.strategy = parse_strategy(s->get<std::string>());
            }
            if (auto c = prov->find("source_caption_id"); c != prov->end() && c->is_number_integer()) {
                e.source_caption_id = c->get<int64_t>();
            }
        }
        m.entries.push_back(std::move(e));
    }

    ChoiceSource shuffle(run_seed ^ fnv1a64("mix"));
    for (std::size_t i = m.entries.size(); i > 1; --i) {
        std::swap(m.entries[i - 1], m.entries[shuffle.next_index(i)]);
    }
    return m;
}

// ---- stats ----

StatsReport stats(const MixManifest& manifest) {
    StatsReport r;
    for (StrategyKind k : kAllStrategies) r.per_strategy[std::string(to_string(k))] = 0;
    for (const auto& e : manifest.entries) {
        const bool original = e.source == EntrySource::Original;
        (original ? r.original_count : r.augmented_count)++;
        if (!original && e.strategy) {
            r.per_strategy[std::string(to_string(*e.strategy))]++;
        }
        for (int64_t cat : std::set<int64_t>(e.labels.begin(), e.labels.end())) {
            auto& counts = r.per_category[cat];
            (original ? counts.original : counts.augmented)++;
        }
    }
    const double n_orig = static_cast<double>(r.original_count);
    const double n_mixed = static_cast<double>(r.original_count + r.augmented_count);
    for (const auto& [cat, counts] : r.per_category) {
        const double before = n_orig > 0 ? counts.original / n_orig : 0.0;
        const double after = n_mixed > 0 ? (counts.original + counts.augmented) / n_mixed : 0.0;
        r.frequency_delta[cat] = after - before;
    }
    return r;
}

Json StatsReport::to_json() const {
    Json cats = Json::array();
    for (const auto& [id, c] : per_category) {
        cats.push_back({{"category_id", id},
                        {"original", c.original},
                        {"augmented", c.augmented},
                        {"frequency_delta", frequency_delta.at(id)}});
    }
    return {{"original_count", original_count},
            {"augmented_count", augmented_count},
            {"per_strategy", per_strategy},
            {"per_category", cats}};
}

std::string StatsReport::summary(std::span<const Category> taxonomy) const {
    std::ostringstream os;
    os << "entries: " << original_count + augmented_count << " (" << original_count << " original, "
       << augmented_count << " augmented)\n";
    os << "strategies:";
    for (const auto& [name, n] : per_strategy) os << ' ' << name << '=' << n;
    os << "\ncategories:\n";
    for (const auto& [id, c] : per_category) {
        const Category* cat = find_category(taxonomy, id);
        os << "  " << std::left << std::setw(16) << (cat ? cat->name : "#" + std::to_string(id)) << std::right
           << " original=" << c.original << " augmented=" << c.augmented << " delta=" << std::showpos
           << std::fixed << std::setprecision(4) << frequency_delta.at(id) << std::noshowpos << '\n';
    }
    return os.str();
}

// ---- files ----

void write_text_file(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << text;
        if (!f) {
            throw BuildError(BuildErrorKind::OutputNotWritable, "cannot write " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw BuildError(BuildErrorKind::OutputNotWritable, "cannot write " + path.string() + ": " + ec.message());
    }
}

std::string read_text_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace semaug
