#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "curate/geometry.hpp"
#include "curate/record.hpp"

namespace curate {

// Connection and behavior settings for one model binding. The pipeline keeps one
// of these per stage so the grounding model and the judge model can differ.
struct ClientConfig {
  // Chat-completions URL, e.g. http://127.0.0.1:8000/v1/chat/completions.
  std::string endpoint;
  // Embedding URL; falls back to `endpoint` when empty.
  std::string embeddings_endpoint;
  std::string model;
  double timeout_seconds = 60.0;
  std::size_t max_in_flight = 4;
  std::size_t retry_limit = 2;
  double backoff_seconds = 0.5;
  // Environment variable holding the bearer token; unset or empty means no auth header.
  std::string auth_env = "CURATE_API_TOKEN";

  // Resize rule the backend applies before inference; used to map predictions back.
  ResizeBounds resize;

  // JSON pointers into the backend reply.
  std::string text_pointer = "/choices/0/message/content";
  std::string embedding_pointer = "/data/0/embedding";
  // Free-form record of which hidden state the backend returns (e.g. "last-token").
  std::string embedding_pooling = "backend-default";

  // Prompt templates; {instruction} and {bbox} are substituted.
  std::string ground_prompt =
      "Locate the GUI element that matches the instruction and output its bounding box "
      "as <answer>[x1,y1,x2,y2]</answer> in absolute pixel coordinates.\nInstruction: {instruction}";
  std::string alignment_prompt =
      "Does the bounding box {bbox} in this screenshot match the element described by the "
      "instruction \"{instruction}\"? Answer yes or no.";
  std::string ambiguity_prompt =
      "Does the instruction \"{instruction}\" clearly point to the GUI element inside the "
      "bounding box {bbox}, without any ambiguity? Answer yes or no.";

  // Throws InputError when an invariant fails.
  void validate() const;
};

struct GroundResult {
  std::string raw_output;
  // Already mapped back to the record's original image frame.
  std::optional<BBox> parsed_box;
  ImageDims model_dims;

  friend bool operator==(const GroundResult&, const GroundResult&) = default;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

enum class JudgeKind { Alignment, Ambiguity };
std::string_view to_string(JudgeKind k) noexcept;

struct ImagePayload {
  std::string bytes;
  std::string mime = "image/png";
};

// Inference backend with four capabilities. Implementations must be safe to call
// from several threads at once.
class ModelClient {
 public:
  explicit ModelClient(ClientConfig config);
  virtual ~ModelClient() = default;

  ModelClient(const ModelClient&) = delete;
  ModelClient& operator=(const ModelClient&) = delete;

  const ClientConfig& config() const noexcept { return config_; }

  virtual GroundResult ground(const GroundingRecord& record) = 0;
  virtual EmbeddingVector embed(const GroundingRecord& record) = 0;
  virtual Label binary_judge(JudgeKind kind, const GroundingRecord& record, const BBox& box) = 0;
  virtual std::string complete(const std::string& prompt, const std::optional<ImagePayload>& image) = 0;

  // Every attempt sent to the backend, retries included.
  std::uint64_t requests_issued() const noexcept { return requests_.load(); }

 protected:
  void count_request() noexcept { requests_.fetch_add(1); }
  // Enforces a constant embedding dimension for the lifetime of the client.
  EmbeddingVector check_dimension(EmbeddingVector v, const std::string& record_id);

 private:
  ClientConfig config_;
  std::atomic<std::uint64_t> requests_{0};
  std::mutex dim_mutex_;
  std::optional<std::size_t> embedding_dim_;
};

// Case-insensitive leading-token rule: "yes..." is positive, "no..." negative.
// Throws JudgeParseError otherwise.
Label parse_judgment(std::string_view response);

// Parses a raw grounding reply produced in `model_dims` space and maps the box to
// the record's frame, clipped to the image. Boxes that collapse are dropped.
GroundResult interpret_ground_output(std::string raw, const GroundingRecord& record,
                                     const ImageDims& model_dims);

// Replaces {instruction} and {bbox} placeholders.
std::string render_prompt(std::string_view tmpl, std::string_view instruction,
                          const std::optional<BBox>& box = std::nullopt);

std::string format_box(const BBox& box);

// Deterministic stand-in backend: every output is a pure function of (seed, inputs),
// no network and no file access.
struct MockBehavior {
  std::uint64_t seed = 0;
  double hit_rate = 0.45;
  double unparseable_rate = 0.05;
  double align_positive_rate = 0.7;
  double ambiguity_positive_rate = 0.8;
  std::size_t embedding_dim = 64;
};

class MockClient : public ModelClient {
 public:
  MockClient(ClientConfig config, MockBehavior behavior);

  GroundResult ground(const GroundingRecord& record) override;
  EmbeddingVector embed(const GroundingRecord& record) override;
  Label binary_judge(JudgeKind kind, const GroundingRecord& record, const BBox& box) override;
  std::string complete(const std::string& prompt, const std::optional<ImagePayload>& image) override;

  const MockBehavior& behavior() const noexcept { return behavior_; }

 private:
  MockBehavior behavior_;
};

struct HttpRequest {
  std::string url;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  double timeout_seconds = 60.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Seam between the client and the network. An empty optional means the request
// never produced a response (connection failure, timeout).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::optional<HttpResponse> post(const HttpRequest& request) = 0;
};

// Plain HTTP transport backed by cpp-httplib.
std::shared_ptr<Transport> make_httplib_transport();

// OpenAI-compatible chat-completions backend. Images are sent inline as base64
// data URLs; transient failures (no response, 429, 5xx) are retried with
// exponential backoff up to `retry_limit` times.
class HttpModelClient : public ModelClient {
 public:
  explicit HttpModelClient(ClientConfig config,
                           std::shared_ptr<Transport> transport = make_httplib_transport());

  GroundResult ground(const GroundingRecord& record) override;
  EmbeddingVector embed(const GroundingRecord& record) override;
  Label binary_judge(JudgeKind kind, const GroundingRecord& record, const BBox& box) override;
  std::string complete(const std::string& prompt, const std::optional<ImagePayload>& image) override;

  // Directory that relative record image paths resolve against.
  void set_image_root(std::string root) { image_root_ = std::move(root); }

 private:
  std::string chat(const std::string& prompt, const std::optional<ImagePayload>& image,
                   const std::string& record_id);
  HttpResponse send_with_retries(const std::string& url, const std::string& body,
                                 const std::string& record_id, std::size_t* attempts_out = nullptr);
  ImagePayload load_image(const GroundingRecord& record) const;

  std::shared_ptr<Transport> transport_;
  std::string image_root_;
};

std::string base64_encode(std::string_view bytes);
std::string mime_for_path(std::string_view path);

}  // namespace curate
