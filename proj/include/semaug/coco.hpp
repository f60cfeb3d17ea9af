#pragma once

// COCO caption + instance annotations: parsing, validation, canonical writing.
//
// Captions and labels live in one Dataset regardless of whether they came from
// a merged document or from separate captions_*.json / instances_*.json files.
// Fields the model does not interpret (license, bbox, segmentation, ...) are
// carried in `extra` and re-emitted on write.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace semaug {

using Json = nlohmann::json;

struct Category {
    int64_t id = 0;
    std::string name;
    std::string supercategory;
    Json extra = Json::object();

    bool operator==(const Category&) const = default;
};

struct ImageRecord {
    int64_t id = 0;
    std::string file_name;
    int64_t width = 0;
    int64_t height = 0;
    Json extra = Json::object();

    bool operator==(const ImageRecord&) const = default;
};

struct CaptionAnnotation {
    int64_t id = 0;
    int64_t image_id = 0;
    std::string caption;
    Json extra = Json::object();

    bool operator==(const CaptionAnnotation&) const = default;
};

struct LabelAnnotation {
    int64_t id = 0;
    int64_t image_id = 0;
    int64_t category_id = 0;
    Json extra = Json::object();

    bool operator==(const LabelAnnotation&) const = default;
};

struct Dataset {
    std::vector<ImageRecord> images;
    std::vector<CaptionAnnotation> captions;
    std::vector<LabelAnnotation> labels;
    std::vector<Category> taxonomy;
    Json extra = Json::object();  // top-level keys other than images/annotations/categories

    bool operator==(const Dataset&) const = default;
};

enum class CocoErrorKind {
    MalformedJson,
    MissingField,
    InvalidField,
    DanglingReference,
    DuplicateId,
    DuplicateName,
    UnknownImage,
    UnknownCategory,
};

std::string_view to_string(CocoErrorKind kind);

/// One invariant violation. `subject` is the record kind ("image", "caption",
/// "label", "category") or, for field errors, the field name.
struct Violation {
    CocoErrorKind kind;
    std::string subject;
    int64_t id = 0;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

class CocoError : public std::runtime_error {
public:
    CocoError(CocoErrorKind kind, std::string subject, int64_t id, const std::string& message);
    explicit CocoError(const Violation& v);

    CocoErrorKind kind() const { return kind_; }
    const std::string& subject() const { return subject_; }
    int64_t id() const { return id_; }

private:
    CocoErrorKind kind_;
    std::string subject_;
    int64_t id_;
};

/// Parses one COCO document and checks every invariant; throws CocoError on the
/// first problem. Records come back sorted by id.
Dataset parse_dataset(std::string_view raw);

/// Parses and merges several documents (e.g. a captions file plus an instances
/// file). Images and categories present in more than one document must agree.
Dataset parse_dataset_documents(std::span<const std::string> raws);

/// Structural parse only: JSON shape and field types are checked, invariants
/// are not. Used by validation tooling to report all violations at once.
Dataset parse_dataset_unchecked(std::string_view raw);

/// Canonical COCO JSON: records in ascending id order, caption annotations
/// before label annotations, object keys sorted. Deterministic.
std::string write_dataset(const Dataset& d);

/// Sorts every record list by id (stable).
void canonicalize(Dataset& d);

ValidationReport validate(const Dataset& d);

/// Distinct categories labelled on an image, ascending by id.
std::vector<Category> labels_for_image(const Dataset& d, int64_t image_id);

/// Other categories sharing `category_id`'s supercategory, ascending by id.
std::vector<Category> supercategory_peers(std::span<const Category> taxonomy, int64_t category_id);

const Category* find_category(std::span<const Category> taxonomy, int64_t category_id);

}  // namespace semaug
