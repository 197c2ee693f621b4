#include "curate/model_client.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "curate/errors.hpp"

namespace curate {

std::string_view to_string(JudgeKind k) noexcept {
  return k == JudgeKind::Alignment ? "alignment" : "ambiguity";
}

void ClientConfig::validate() const {
  if (max_in_flight < 1) throw InputError("client config: max_in_flight must be >= 1");
  if (!(timeout_seconds > 0.0)) throw InputError("client config: timeout must be > 0");
  if (backoff_seconds < 0.0) throw InputError("client config: backoff must be >= 0");
  if (resize.patch < 1 || resize.min_pixels > resize.max_pixels) {
    throw InputError("client config: invalid resize bounds");
  }
}

ModelClient::ModelClient(ClientConfig config) : config_(std::move(config)) {
  config_.validate();
}

EmbeddingVector ModelClient::check_dimension(EmbeddingVector v, const std::string& record_id) {
  if (v.values.empty()) throw ConsistencyError("empty embedding for record " + record_id);
  for (double x : v.values) {
    if (!std::isfinite(x)) throw ConsistencyError("non-finite embedding entry for record " + record_id);
  }
  std::lock_guard lock(dim_mutex_);
  if (!embedding_dim_) {
    embedding_dim_ = v.dim();
  } else if (*embedding_dim_ != v.dim()) {
    throw ConsistencyError("embedding dimension changed from " + std::to_string(*embedding_dim_) +
                           " to " + std::to_string(v.dim()) + " at record " + record_id);
  }
  return v;
}

Label parse_judgment(std::string_view response) {
  std::size_t i = 0;
  while (i < response.size() && !std::isalpha(static_cast<unsigned char>(response[i]))) {
    const unsigned char c = static_cast<unsigned char>(response[i]);
    // Only whitespace and quoting/markup may precede the verdict word.
    if (!std::isspace(c) && c != '"' && c != '\'' && c != '*' && c != '`') break;
    ++i;
  }
  std::string word;
  while (i < response.size() && std::isalpha(static_cast<unsigned char>(response[i]))) {
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(response[i]))));
    ++i;
  }
  if (word == "yes") return Label::Positive;
  if (word == "no") return Label::Negative;
  throw JudgeParseError("judge reply does not start with yes/no", std::string(response));
}

GroundResult interpret_ground_output(std::string raw, const GroundingRecord& record,
                                     const ImageDims& model_dims) {
  GroundResult out;
  out.model_dims = model_dims;
  if (auto box = parse_bbox(raw)) {
    const BBox scaled = rescale_bbox(*box, model_dims, record.dims);
    const double w = static_cast<double>(record.dims.width);
    const double h = static_cast<double>(record.dims.height);
    out.parsed_box = BBox::from_corners(std::clamp(scaled.x1, 0.0, w), std::clamp(scaled.y1, 0.0, h),
                                        std::clamp(scaled.x2, 0.0, w), std::clamp(scaled.y2, 0.0, h));
  }
  out.raw_output = std::move(raw);
  return out;
}

namespace {

std::string format_number(double v) {
  if (std::nearbyint(v) == v && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string format_box(const BBox& box) {
  return "[" + format_number(box.x1) + "," + format_number(box.y1) + "," + format_number(box.x2) + "," +
         format_number(box.y2) + "]";
}

std::string render_prompt(std::string_view tmpl, std::string_view instruction, const std::optional<BBox>& box) {
  std::string out(tmpl);
  if (box) replace_all(out, "{bbox}", format_box(*box));
  replace_all(out, "{instruction}", instruction);
  return out;
}

}  // namespace curate
