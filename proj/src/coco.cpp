#include "semaug/coco.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace semaug {

namespace {

CocoError missing(std::string field, int64_t id = 0) {
    return CocoError(CocoErrorKind::MissingField, field, id, "missing field '" + field + "'");
}

CocoError invalid(std::string field, int64_t id, const std::string& why) {
    return CocoError(CocoErrorKind::InvalidField, field, id, "field '" + field + "': " + why);
}

const Json& require(const Json& obj, const char* field, int64_t id = 0) {
    auto it = obj.find(field);
    if (it == obj.end()) {
        throw missing(field, id);
    }
    return *it;
}

int64_t require_int(const Json& obj, const char* field, int64_t id = 0) {
    const Json& v = require(obj, field, id);
    if (!v.is_number_integer()) {
        throw invalid(field, id, "expected an integer");
    }
    if (v.is_number_unsigned() && v.get<uint64_t>() > static_cast<uint64_t>(INT64_MAX)) {
        throw invalid(field, id, "integer out of range");
    }
    return v.get<int64_t>();
}

std::string require_string(const Json& obj, const char* field, int64_t id) {
    const Json& v = require(obj, field, id);
    if (!v.is_string()) {
        throw invalid(field, id, "expected a string");
    }
    return v.get<std::string>();
}

Json extras_of(const Json& obj, std::initializer_list<const char*> known) {
    Json extra = obj;
    for (const char* k : known) {
        extra.erase(k);
    }
    return extra;
}

const Json& require_array(const Json& doc, const char* key) {
    const Json& arr = require(doc, key);
    if (!arr.is_array()) {
        throw invalid(key, 0, "expected an array");
    }
    return arr;
}

void require_object(const Json& v, const char* what) {
    if (!v.is_object()) {
        throw invalid(what, 0, "expected an object");
    }
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    });
}

template <typename T>
void sort_by_id(std::vector<T>& v) {
    std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.id < b.id; });
}

template <typename T>
void check_ids(const std::vector<T>& records, const char* kind, ValidationReport& report) {
    std::unordered_set<int64_t> seen;
    for (const auto& r : records) {
        if (r.id <= 0) {
            report.push_back({CocoErrorKind::InvalidField, "id", r.id, std::string(kind) + " id must be positive"});
        }
        if (!seen.insert(r.id).second) {
            report.push_back({CocoErrorKind::DuplicateId, kind, r.id, std::string("duplicate ") + kind + " id"});
        }
    }
}

}  // namespace

std::string_view to_string(CocoErrorKind kind) {
    switch (kind) {
        case CocoErrorKind::MalformedJson: return "MalformedJson";
        case CocoErrorKind::MissingField: return "MissingField";
        case CocoErrorKind::InvalidField: return "InvalidField";
        case CocoErrorKind::DanglingReference: return "DanglingReference";
        case CocoErrorKind::DuplicateId: return "DuplicateId";
        case CocoErrorKind::DuplicateName: return "DuplicateName";
        case CocoErrorKind::UnknownImage: return "UnknownImage";
        case CocoErrorKind::UnknownCategory: return "UnknownCategory";
    }
    return "Unknown";
}

CocoError::CocoError(CocoErrorKind kind, std::string subject, int64_t id, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      subject_(std::move(subject)),
      id_(id) {}

CocoError::CocoError(const Violation& v)
    : CocoError(v.kind, v.subject, v.id, v.detail + " (" + v.subject + " " + std::to_string(v.id) + ")") {}

Dataset parse_dataset_unchecked(std::string_view raw) {
    Json doc;
    try {
        doc = Json::parse(raw.begin(), raw.end());
    } catch (const Json::parse_error& e) {
        throw CocoError(CocoErrorKind::MalformedJson, "document", 0, e.what());
    }
    if (!doc.is_object()) {
        throw CocoError(CocoErrorKind::MalformedJson, "document", 0, "top level must be a JSON object");
    }

    Dataset d;
    for (const Json& img : require_array(doc, "images")) {
        require_object(img, "images[]");
        ImageRecord r;
        r.id = require_int(img, "id");
        r.file_name = require_string(img, "file_name", r.id);
        r.width = require_int(img, "width", r.id);
        r.height = require_int(img, "height", r.id);
        r.extra = extras_of(img, {"id", "file_name", "width", "height"});
        d.images.push_back(std::move(r));
    }

    for (const Json& ann : require_array(doc, "annotations")) {
        require_object(ann, "annotations[]");
        const int64_t id = require_int(ann, "id");
        const bool is_caption = ann.contains("caption");
        const bool is_label = ann.contains("category_id");
        if (is_caption && is_label) {
            throw invalid("annotations[]", id, "carries both 'caption' and 'category_id'");
        }
        if (!is_caption && !is_label) {
            throw missing("caption|category_id", id);
        }
        if (is_caption) {
            CaptionAnnotation c;
            c.id = id;
            c.image_id = require_int(ann, "image_id", id);
            c.caption = require_string(ann, "caption", id);
            c.extra = extras_of(ann, {"id", "image_id", "caption"});
            d.captions.push_back(std::move(c));
        } else {
            LabelAnnotation l;
            l.id = id;
            l.image_id = require_int(ann, "image_id", id);
            l.category_id = require_int(ann, "category_id", id);
            l.extra = extras_of(ann, {"id", "image_id", "category_id"});
            d.labels.push_back(std::move(l));
        }
    }

    // Stock COCO caption files ship without a "categories" array.
    if (doc.contains("categories")) {
        for (const Json& cat : require_array(doc, "categories")) {
            require_object(cat, "categories[]");
            Category c;
            c.id = require_int(cat, "id");
            c.name = require_string(cat, "name", c.id);
            c.supercategory = require_string(cat, "supercategory", c.id);
            c.extra = extras_of(cat, {"id", "name", "supercategory"});
            d.taxonomy.push_back(std::move(c));
        }
    }

    d.extra = extras_of(doc, {"images", "annotations", "categories"});
    canonicalize(d);
    return d;
}

Dataset parse_dataset_documents(std::span<const std::string> raws) {
    Dataset merged;
    bool first = true;
    for (const std::string& raw : raws) {
        Dataset part = parse_dataset_unchecked(raw);
        if (first) {
            merged = std::move(part);
            first = false;
            continue;
        }
        // Identical image/category records repeated across documents collapse;
        // conflicting ones are kept so validate() reports them.
        for (auto& img : part.images) {
            auto same = std::find(merged.images.begin(), merged.images.end(), img);
            if (same == merged.images.end()) {
                merged.images.push_back(std::move(img));
            }
        }
        for (auto& cat : part.taxonomy) {
            auto same = std::find(merged.taxonomy.begin(), merged.taxonomy.end(), cat);
            if (same == merged.taxonomy.end()) {
                merged.taxonomy.push_back(std::move(cat));
            }
        }
        std::move(part.captions.begin(), part.captions.end(), std::back_inserter(merged.captions));
        std::move(part.labels.begin(), part.labels.end(), std::back_inserter(merged.labels));
        for (auto& [key, value] : part.extra.items()) {
            if (!merged.extra.contains(key)) {
                merged.extra[key] = value;
            }
        }
    }
    canonicalize(merged);
    ValidationReport report = validate(merged);
    if (!report.empty()) {
        throw CocoError(report.front());
    }
    return merged;
}

Dataset parse_dataset(std::string_view raw) {
    const std::string doc(raw);
    return parse_dataset_documents(std::span<const std::string>(&doc, 1));
}

void canonicalize(Dataset& d) {
    sort_by_id(d.images);
    sort_by_id(d.captions);
    sort_by_id(d.labels);
    sort_by_id(d.taxonomy);
}

std::string write_dataset(const Dataset& input) {
    Dataset d = input;
    canonicalize(d);

    Json images = Json::array();
    for (const auto& r : d.images) {
        Json o = r.extra;
        o["id"] = r.id;
        o["file_name"] = r.file_name;
        o["width"] = r.width;
        o["height"] = r.height;
        images.push_back(std::move(o));
    }
    Json annotations = Json::array();
    for (const auto& c : d.captions) {
        Json o = c.extra;
        o["id"] = c.id;
        o["image_id"] = c.image_id;
        o["caption"] = c.caption;
        annotations.push_back(std::move(o));
    }
    for (const auto& l : d.labels) {
        Json o = l.extra;
        o["id"] = l.id;
        o["image_id"] = l.image_id;
        o["category_id"] = l.category_id;
        annotations.push_back(std::move(o));
    }
    Json categories = Json::array();
    for (const auto& c : d.taxonomy) {
        Json o = c.extra;
        o["id"] = c.id;
        o["name"] = c.name;
        o["supercategory"] = c.supercategory;
        categories.push_back(std::move(o));
    }

    Json doc = d.extra.is_object() ? d.extra : Json::object();
    doc["images"] = std::move(images);
    doc["annotations"] = std::move(annotations);
    doc["categories"] = std::move(categories);
    return doc.dump(1) + "\n";
}

ValidationReport validate(const Dataset& d) {
    ValidationReport report;

    check_ids(d.images, "image", report);
    std::unordered_set<int64_t> image_ids;
    for (const auto& img : d.images) {
        image_ids.insert(img.id);
        if (img.width < 1 || img.height < 1) {
            report.push_back({CocoErrorKind::InvalidField, "width/height", img.id, "image dimensions must be >= 1"});
        }
        if (img.file_name.empty() || img.file_name.front() == '/') {
            report.push_back({CocoErrorKind::InvalidField, "file_name", img.id, "file_name must be a nonempty relative path"});
        }
    }

    check_ids(d.taxonomy, "category", report);
    std::unordered_set<int64_t> category_ids;
    std::set<std::string> names;
    for (const auto& c : d.taxonomy) {
        category_ids.insert(c.id);
        if (c.name.empty()) {
            report.push_back({CocoErrorKind::InvalidField, "name", c.id, "category name must be nonempty"});
        } else if (!names.insert(c.name).second) {
            report.push_back({CocoErrorKind::DuplicateName, "category", c.id, "duplicate category name '" + c.name + "'"});
        }
        if (c.supercategory.empty()) {
            report.push_back({CocoErrorKind::InvalidField, "supercategory", c.id, "supercategory must be nonempty"});
        }
    }

    check_ids(d.captions, "caption", report);
    for (const auto& c : d.captions) {
        if (!image_ids.count(c.image_id)) {
            report.push_back({CocoErrorKind::DanglingReference, "image", c.image_id,
                              "caption " + std::to_string(c.id) + " references a missing image"});
        }
        if (blank(c.caption)) {
            report.push_back({CocoErrorKind::InvalidField, "caption", c.id, "caption is empty"});
        }
    }

    check_ids(d.labels, "label", report);
    for (const auto& l : d.labels) {
        if (!image_ids.count(l.image_id)) {
            report.push_back({CocoErrorKind::DanglingReference, "image", l.image_id,
                              "label " + std::to_string(l.id) + " references a missing image"});
        }
        if (!category_ids.count(l.category_id)) {
            report.push_back({CocoErrorKind::DanglingReference, "category", l.category_id,
                              "label " + std::to_string(l.id) + " references a missing category"});
        }
    }
    return report;
}

const Category* find_category(std::span<const Category> taxonomy, int64_t category_id) {
    auto it = std::find_if(taxonomy.begin(), taxonomy.end(), [&](const Category& c) { return c.id == category_id; });
    return it == taxonomy.end() ? nullptr : &*it;
}

std::vector<Category> labels_for_image(const Dataset& d, int64_t image_id) {
    const bool known = std::any_of(d.images.begin(), d.images.end(), [&](const ImageRecord& r) { return r.id == image_id; });
    if (!known) {
        throw CocoError(CocoErrorKind::UnknownImage, "image", image_id, "no image with id " + std::to_string(image_id));
    }
    std::set<int64_t> ids;
    for (const auto& l : d.labels) {
        if (l.image_id == image_id) {
            ids.insert(l.category_id);
        }
    }
    std::vector<Category> out;
    for (int64_t id : ids) {
        if (const Category* c = find_category(d.taxonomy, id)) {
            out.push_back(*c);
        }
    }
    return out;
}

std::vector<Category> supercategory_peers(std::span<const Category> taxonomy, int64_t category_id) {
    const Category* self = find_category(taxonomy, category_id);
    if (!self) {
        throw CocoError(CocoErrorKind::UnknownCategory, "category", category_id,
                        "no category with id " + std::to_string(category_id));
    }
    std::vector<Category> peers;
    for (const auto& c : taxonomy) {
        if (c.id != category_id && c.supercategory == self->supercategory) {
            peers.push_back(c);
        }
    }
    std::sort(peers.begin(), peers.end(), [](const Category& a, const Category& b) { return a.id < b.id; });
    return peers;
}

}  // namespace semaug
