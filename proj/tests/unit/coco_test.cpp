#include <algorithm>
#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace semaug;
using semaug::test::coco_taxonomy;
using semaug::test::data_path;
using semaug::test::fixture;
using semaug::test::slurp;

namespace {

const char* kMinimal = R"({
  "images": [{"id": 1, "file_name": "a.jpg", "width": 4, "height": 3}],
  "annotations": [
    {"id": 1, "image_id": 1, "caption": "a dog"},
    {"id": 2, "image_id": 1, "category_id": 18}
  ],
  "categories": [{"id": 18, "name": "dog", "supercategory": "animal"}]
})";

CocoErrorKind parse_error_kind(const std::string& raw) {
    try {
        parse_dataset(raw);
    } catch (const CocoError& e) {
        return e.kind();
    }
    FAIL("expected CocoError");
    return CocoErrorKind::MalformedJson;
}

std::vector<Category> small_taxonomy() {
    return {{17, "cat", "animal", Json::object()},
            {18, "dog", "animal", Json::object()},
            {3, "car", "vehicle", Json::object()}};
}

Json fixture_json() { return Json::parse(slurp(data_path("coco_fixture.json"))); }

bool has_violation(const ValidationReport& r, CocoErrorKind kind, int64_t id) {
    return std::any_of(r.begin(), r.end(), [&](const Violation& v) { return v.kind == kind && v.id == id; });
}

}  // namespace

TEST_CASE("minimal document parses into its four records") {
    const Dataset d = parse_dataset(kMinimal);
    REQUIRE(d.images.size() == 1);
    REQUIRE(d.captions.size() == 1);
    REQUIRE(d.labels.size() == 1);
    REQUIRE(d.taxonomy.size() == 1);
    CHECK(d.images[0].file_name == "a.jpg");
    CHECK(d.images[0].width == 4);
    CHECK(d.captions[0].caption == "a dog");
    CHECK(d.labels[0].category_id == 18);
    CHECK(d.taxonomy[0].supercategory == "animal");
}

TEST_CASE("parse errors carry their kind") {
    CHECK(parse_error_kind("{not json") == CocoErrorKind::MalformedJson);
    CHECK(parse_error_kind("[1, 2]") == CocoErrorKind::MalformedJson);
    CHECK(parse_error_kind(R"({"annotations": []})") == CocoErrorKind::MissingField);
    CHECK(parse_error_kind(R"({"images": []})") == CocoErrorKind::MissingField);
    CHECK(parse_error_kind(R"({"images": [{"id": 1, "width": 1, "height": 1}], "annotations": []})") ==
          CocoErrorKind::MissingField);
    CHECK(parse_error_kind(R"({"images": [], "annotations": [{"id": 1, "image_id": 1}]})") ==
          CocoErrorKind::MissingField);
    CHECK(parse_error_kind(
              R"({"images": [{"id": 1, "file_name": "a", "width": "wide", "height": 1}], "annotations": []})") ==
          CocoErrorKind::InvalidField);
}

TEST_CASE("caption pointing at a missing image is a dangling reference") {
    Json j = Json::parse(kMinimal);
    j["annotations"][0]["image_id"] = 99;
    try {
        parse_dataset(j.dump());
        FAIL("expected DanglingReference");
    } catch (const CocoError& e) {
        CHECK(e.kind() == CocoErrorKind::DanglingReference);
        CHECK(e.id() == 99);
    }
}

TEST_CASE("duplicate ids are rejected") {
    Json j = Json::parse(kMinimal);
    j["images"].push_back(j["images"][0]);
    CHECK(parse_error_kind(j.dump()) == CocoErrorKind::DuplicateId);
}

TEST_CASE("split caption and instance files merge") {
    const Json all = fixture_json();
    Json captions = all;
    Json instances = all;
    captions.erase("categories");
    captions["annotations"] = Json::array();
    instances["annotations"] = Json::array();
    for (const auto& a : all["annotations"]) {
        (a.contains("caption") ? captions : instances)["annotations"].push_back(a);
    }
    const std::vector<std::string> docs = {captions.dump(), instances.dump()};
    CHECK(parse_dataset_documents(docs) == fixture());
}

TEST_CASE("fixture shape") {
    const Dataset& d = fixture();
    CHECK(d.images.size() == 20);
    CHECK(d.captions.size() == 81);
    CHECK(d.labels.size() == 49);
    CHECK(d.taxonomy.size() == 80);
    CHECK(validate(d).empty());
}

TEST_CASE("round trip over the 20-image fixture") {
    const Dataset& d = fixture();
    const std::string once = write_dataset(d);
    const Dataset back = parse_dataset(once);
    CHECK(back == d);
    CHECK(write_dataset(back) == once);
}

TEST_CASE("round trip preserves fields we do not interpret") {
    const Dataset& d = fixture();
    CHECK(d.extra.contains("info"));
    CHECK(d.extra.contains("licenses"));
    CHECK(d.images.front().extra.contains("flickr_url"));
    CHECK(d.labels.front().extra.contains("bbox"));
    CHECK(d.labels.front().extra.contains("segmentation"));

    const Json out = Json::parse(write_dataset(d));
    const Json in = fixture_json();
    CHECK(out["info"] == in["info"]);
    CHECK(out["licenses"] == in["licenses"]);
    // Same annotation objects, only the order may differ.
    auto sorted = [](Json arr) {
        std::vector<std::string> v;
        for (auto& a : arr) v.push_back(a.dump());
        std::sort(v.begin(), v.end());
        return v;
    };
    CHECK(sorted(out["annotations"]) == sorted(in["annotations"]));
    CHECK(sorted(out["images"]) == sorted(in["images"]));
}

TEST_CASE("round trip of shuffled input matches canonical order") {
    Json j = fixture_json();
    std::mt19937 rng(7);
    std::shuffle(j["images"].begin(), j["images"].end(), rng);
    std::shuffle(j["annotations"].begin(), j["annotations"].end(), rng);
    std::shuffle(j["categories"].begin(), j["categories"].end(), rng);
    CHECK(write_dataset(parse_dataset(j.dump())) == write_dataset(fixture()));
}

TEST_CASE("write is deterministic and ascending") {
    const Dataset one = parse_dataset(kMinimal);
    CHECK(write_dataset(one) == write_dataset(one));

    const Json out = Json::parse(write_dataset(fixture()));
    int64_t prev = 0;
    for (const auto& img : out["images"]) {
        CHECK(img["id"].get<int64_t>() > prev);
        prev = img["id"];
    }
    // Captions first, each group ascending.
    bool in_labels = false;
    int64_t prev_caption = 0;
    int64_t prev_label = 0;
    for (const auto& a : out["annotations"]) {
        if (a.contains("category_id")) {
            in_labels = true;
            CHECK(a["id"].get<int64_t>() > prev_label);
            prev_label = a["id"];
        } else {
            CHECK_FALSE(in_labels);
            CHECK(a["id"].get<int64_t>() > prev_caption);
            prev_caption = a["id"];
        }
    }
}

TEST_CASE("empty dataset writes empty arrays") {
    const Json out = Json::parse(write_dataset(Dataset{}));
    CHECK(out["images"] == Json::array());
    CHECK(out["annotations"] == Json::array());
    CHECK(out["categories"] == Json::array());
    CHECK(parse_dataset(write_dataset(Dataset{})) == Dataset{});
}

TEST_CASE("stock caption files without categories parse") {
    Json j = Json::parse(kMinimal);
    j.erase("categories");
    j["annotations"].erase(1);
    const Dataset d = parse_dataset(j.dump());
    CHECK(d.taxonomy.empty());
    CHECK(d.captions.size() == 1);
}

TEST_CASE("labels_for_image") {
    Dataset d = parse_dataset(kMinimal);
    d.taxonomy = small_taxonomy();
    d.taxonomy.push_back({1, "person", "person", Json::object()});
    d.labels.push_back({3, 1, 1, Json::object()});

    SUBCASE("two categories") {
        const auto labels = labels_for_image(d, 1);
        REQUIRE(labels.size() == 2);
        CHECK(labels[0].name == "person");
        CHECK(labels[1].name == "dog");
    }
    SUBCASE("repeated category collapses") {
        d.labels = {{2, 1, 18, Json::object()}, {3, 1, 18, Json::object()}};
        const auto labels = labels_for_image(d, 1);
        REQUIRE(labels.size() == 1);
        CHECK(labels[0].id == 18);
    }
    SUBCASE("no labels") {
        d.labels.clear();
        CHECK(labels_for_image(d, 1).empty());
    }
    SUBCASE("unknown image") {
        try {
            labels_for_image(d, 42);
            FAIL("expected UnknownImage");
        } catch (const CocoError& e) {
            CHECK(e.kind() == CocoErrorKind::UnknownImage);
        }
    }
}

TEST_CASE("fixture images with repeated categories dedupe") {
    const auto l139 = labels_for_image(fixture(), 139);
    REQUIRE(l139.size() == 3);
    CHECK(l139[0].id == 1);
    CHECK(labels_for_image(fixture(), 776).size() == 1);
}

TEST_CASE("supercategory peers") {
    const auto tax = small_taxonomy();
    const auto dog = supercategory_peers(tax, 18);
    REQUIRE(dog.size() == 1);
    CHECK(dog[0].name == "cat");
    CHECK(supercategory_peers(tax, 3).empty());
    try {
        supercategory_peers(tax, 999);
        FAIL("expected UnknownCategory");
    } catch (const CocoError& e) {
        CHECK(e.kind() == CocoErrorKind::UnknownCategory);
    }
}

TEST_CASE("full COCO taxonomy: dog has nine animal peers") {
    const auto& tax = coco_taxonomy();
    REQUIRE(tax.size() == 80);
    const auto peers = supercategory_peers(tax, 18);
    CHECK(peers.size() == 9);
    CHECK(std::is_sorted(peers.begin(), peers.end(), [](auto& a, auto& b) { return a.id < b.id; }));
    for (const auto& p : peers) CHECK(p.supercategory == "animal");
}

TEST_CASE("peer membership is symmetric") {
    const auto& tax = coco_taxonomy();
    for (const auto& a : tax) {
        const auto pa = supercategory_peers(tax, a.id);
        CHECK(std::none_of(pa.begin(), pa.end(), [&](auto& c) { return c.id == a.id; }));
        for (const auto& b : tax) {
            if (a.id == b.id) continue;
            const auto pb = supercategory_peers(tax, b.id);
            const bool b_in_a = std::any_of(pa.begin(), pa.end(), [&](auto& c) { return c.id == b.id; });
            const bool a_in_b = std::any_of(pb.begin(), pb.end(), [&](auto& c) { return c.id == a.id; });
            if (b_in_a != a_in_b) FAIL_CHECK("asymmetric peers " << a.name << " / " << b.name);
        }
    }
}

TEST_CASE("validate: duplicate image id yields one entry") {
    Dataset d = fixture();
    ImageRecord dup = d.images[3];
    d.images.push_back(dup);
    const auto r = validate(d);
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == CocoErrorKind::DuplicateId);
    CHECK(r[0].id == dup.id);
}

TEST_CASE("validate: three seeded violations are exactly reported") {
    Dataset d = fixture();
    d.captions[5].image_id = 424242;
    d.labels[7].category_id = 9999;
    d.images[2].width = 0;
    const auto r = validate(d);
    REQUIRE(r.size() == 3);
    CHECK(has_violation(r, CocoErrorKind::DanglingReference, 424242));
    CHECK(has_violation(r, CocoErrorKind::DanglingReference, 9999));
    CHECK(has_violation(r, CocoErrorKind::InvalidField, d.images[2].id));
}

TEST_CASE("validate: each single mutation is named") {
    struct Mutation {
        const char* what;
        void (*apply)(Dataset&);
        CocoErrorKind kind;
    };
    const Mutation mutations[] = {
        {"image id zero", [](Dataset& d) { d.images[0].id = 0; }, CocoErrorKind::InvalidField},
        {"negative height", [](Dataset& d) { d.images[1].height = -5; }, CocoErrorKind::InvalidField},
        {"empty file name", [](Dataset& d) { d.images[2].file_name.clear(); }, CocoErrorKind::InvalidField},
        {"absolute file name", [](Dataset& d) { d.images[2].file_name = "/abs/x.jpg"; }, CocoErrorKind::InvalidField},
        {"duplicate caption id", [](Dataset& d) { d.captions[1].id = d.captions[0].id; }, CocoErrorKind::DuplicateId},
        {"duplicate label id", [](Dataset& d) { d.labels[1].id = d.labels[0].id; }, CocoErrorKind::DuplicateId},
        {"duplicate category id", [](Dataset& d) { d.taxonomy[1].id = d.taxonomy[0].id; }, CocoErrorKind::DuplicateId},
        {"duplicate category name", [](Dataset& d) { d.taxonomy[1].name = d.taxonomy[0].name; },
         CocoErrorKind::DuplicateName},
        {"blank caption", [](Dataset& d) { d.captions[3].caption = "  \t "; }, CocoErrorKind::InvalidField},
        {"empty category name", [](Dataset& d) { d.taxonomy[4].name.clear(); }, CocoErrorKind::InvalidField},
        {"empty supercategory", [](Dataset& d) { d.taxonomy[4].supercategory.clear(); },
         CocoErrorKind::InvalidField},
        {"label to missing image", [](Dataset& d) { d.labels[0].image_id = 3; }, CocoErrorKind::DanglingReference},
        {"caption to missing image", [](Dataset& d) { d.captions[0].image_id = 3; },
         CocoErrorKind::DanglingReference},
        {"label to missing category", [](Dataset& d) { d.labels[0].category_id = 1000; },
         CocoErrorKind::DanglingReference},
    };
    for (const auto& m : mutations) {
        CAPTURE(m.what);
        Dataset d = fixture();
        m.apply(d);
        const auto r = validate(d);
        CHECK(r.size() >= 1);
        CHECK(std::any_of(r.begin(), r.end(), [&](const Violation& v) { return v.kind == m.kind; }));
    }
}

TEST_CASE("unchecked parse keeps violations for reporting") {
    Json j = fixture_json();
    j["annotations"][0]["image_id"] = 77;
    const Dataset d = parse_dataset_unchecked(j.dump());
    CHECK(has_violation(validate(d), CocoErrorKind::DanglingReference, 77));
}

TEST_CASE("annotation with both shapes is rejected") {
    Json j = Json::parse(kMinimal);
    j["annotations"][0]["category_id"] = 18;
    CHECK(parse_error_kind(j.dump()) == CocoErrorKind::InvalidField);
}
