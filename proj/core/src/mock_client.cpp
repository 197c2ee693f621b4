#include "curate/model_client.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "curate/digest.hpp"
#include "curate/errors.hpp"
#include "curate/random.hpp"

namespace curate {

namespace {

constexpr std::array<std::string_view, 6> kCannedTraces = {
    "The screen shows a settings panel with several toggles. The requested option sits in the list on the "
    "left side.",
    "The interface is a file manager window. The target entry is labelled with the name given in the "
    "instruction.",
    "The image displays a web page with a navigation bar. The matching link appears near the top of the page.",
    "The screenshot shows a mobile home screen. The relevant app icon is located in the bottom dock.",
    "The red box marks the button that should be clicked.",
    "The window is a text editor. The toolbar runs along the top. The control is the second icon from the "
    "left.",
};

BBox centered_box(Point c, double half_w, double half_h, const ImageDims& dims) {
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);
  half_w = std::max(0.5, std::min({half_w, c.x, w - c.x}));
  half_h = std::max(0.5, std::min({half_h, c.y, h - c.y}));
  return BBox{std::max(0.0, c.x - half_w), std::max(0.0, c.y - half_h), std::min(w, c.x + half_w),
              std::min(h, c.y + half_h)};
}

BBox round_box(const BBox& b) {
  return BBox{std::round(b.x1), std::round(b.y1), std::round(b.x2), std::round(b.y2)};
}

}  // namespace

MockClient::MockClient(ClientConfig config, MockBehavior behavior)
    : ModelClient(std::move(config)), behavior_(behavior) {
  if (behavior_.embedding_dim == 0) throw InputError("mock client: embedding_dim must be >= 1");
}

GroundResult MockClient::ground(const GroundingRecord& record) {
  count_request();
  const ImageDims model_dims = smart_resize(record.dims, config().resize).dims;
  Rng rng(mix_seed(behavior_.seed, "ground\x1f" + record.id));
  const double u = uniform01(rng);
  const double w = static_cast<double>(record.dims.width);
  const double h = static_cast<double>(record.dims.height);

  if (u < behavior_.unparseable_rate) {
    return interpret_ground_output("<think>The element is not visible.</think><answer>none</answer>", record,
                                   model_dims);
  }
  BBox box;
  if (u < behavior_.unparseable_rate + behavior_.hit_rate) {
    const double scale = 0.5 + uniform01(rng);
    box = centered_box(record.gt_box.center(), record.gt_box.width() / 2 * scale,
                       record.gt_box.height() / 2 * scale, record.dims);
  } else {
    Point c{uniform01(rng) * w, uniform01(rng) * h};
    for (int tries = 0; tries < 16 && point_in_box(c, record.gt_box); ++tries) {
      c = Point{uniform01(rng) * w, uniform01(rng) * h};
    }
    box = centered_box(c, 4.0 + uniform01(rng) * w / 10, 4.0 + uniform01(rng) * h / 10, record.dims);
  }
  const BBox in_model = round_box(rescale_bbox(box, record.dims, model_dims));
  std::string raw = "<think>Looking for: " + record.instruction + "</think><answer>" + format_box(in_model) +
                    "</answer>";
  return interpret_ground_output(std::move(raw), record, model_dims);
}

EmbeddingVector MockClient::embed(const GroundingRecord& record) {
  count_request();
  // Records sharing a screenshot share a component, so the space has some structure.
  Rng screen(mix_seed(behavior_.seed, "embed-image\x1f" + record.image));
  Rng text(mix_seed(behavior_.seed, "embed\x1f" + record.instruction + "\x1f" + record.image));
  EmbeddingVector v;
  v.values.resize(behavior_.embedding_dim);
  for (double& x : v.values) x = standard_normal(screen) + 0.5 * standard_normal(text);
  return check_dimension(std::move(v), record.id);
}

Label MockClient::binary_judge(JudgeKind kind, const GroundingRecord& record, const BBox& box) {
  count_request();
  Rng rng(mix_seed(behavior_.seed,
                   std::string(to_string(kind)) + "\x1f" + record.id + "\x1f" + format_box(box)));
  const double rate =
      kind == JudgeKind::Alignment ? behavior_.align_positive_rate : behavior_.ambiguity_positive_rate;
  const std::string reply = bernoulli(rng, rate) ? "Yes." : "No, the box does not match the instruction.";
  return parse_judgment(reply);
}

std::string MockClient::complete(const std::string& prompt, const std::optional<ImagePayload>& image) {
  if (prompt.empty()) throw InputError("complete: empty prompt");
  count_request();
  std::string key = prompt;
  if (image) key += "\x1f" + sha256_hex(image->bytes);
  Rng rng(mix_seed(behavior_.seed, "complete\x1f" + sha256_hex(key)));
  const auto& trace = kCannedTraces[uniform_index(rng, kCannedTraces.size())];
  return "{\"response\": \"" + std::string(trace) + "\"}";
}

}  // namespace curate
