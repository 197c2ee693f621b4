#include <httplib.h>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <thread>

#include "curate/errors.hpp"
#include "curate/model_client.hpp"

namespace curate {

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string mime_for_path(std::string_view path) {
  auto ends_with = [&](std::string_view suffix) {
    if (path.size() < suffix.size()) return false;
    for (std::size_t i = 0; i < suffix.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(path[path.size() - suffix.size() + i])) != suffix[i]) return false;
    }
    return true;
  };
  if (ends_with(".png")) return "image/png";
  if (ends_with(".jpg") || ends_with(".jpeg")) return "image/jpeg";
  if (ends_with(".webp")) return "image/webp";
  if (ends_with(".gif")) return "image/gif";
  if (ends_with(".bmp")) return "image/bmp";
  return "application/octet-stream";
}

namespace {

class HttplibTransport : public Transport {
 public:
  std::optional<HttpResponse> post(const HttpRequest& request) override {
    const auto scheme_end = request.url.find("://");
    const auto path_start = request.url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string origin = request.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client cli(origin);
    const auto secs = static_cast<time_t>(request.timeout_seconds);
    const auto usecs = static_cast<time_t>((request.timeout_seconds - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto res = cli.Post(path, headers, request.body, "application/json");
    if (!res) return std::nullopt;
    return HttpResponse{res->status, res->body};
  }
};

bool transient(const std::optional<HttpResponse>& r) {
  return !r || r->status == 429 || r->status >= 500;
}

nlohmann::json user_message(const std::string& prompt, const std::optional<ImagePayload>& image) {
  nlohmann::json content = nlohmann::json::array();
  if (image) {
    content.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:" + image->mime + ";base64," + base64_encode(image->bytes)}}}});
  }
  content.push_back({{"type", "text"}, {"text", prompt}});
  return {{"role", "user"}, {"content", std::move(content)}};
}

}  // namespace

std::shared_ptr<Transport> make_httplib_transport() {
  return std::make_shared<HttplibTransport>();
}

HttpModelClient::HttpModelClient(ClientConfig config, std::shared_ptr<Transport> transport)
    : ModelClient(std::move(config)), transport_(std::move(transport)) {
  if (!transport_) throw InputError("http client: null transport");
}

HttpResponse HttpModelClient::send_with_retries(const std::string& url, const std::string& body,
                                                const std::string& record_id, std::size_t* attempts_out) {
  HttpRequest request;
  request.url = url;
  request.body = body;
  request.timeout_seconds = config().timeout_seconds;
  request.headers.emplace_back("Content-Type", "application/json");
  if (!config().auth_env.empty()) {
    if (const char* token = std::getenv(config().auth_env.c_str()); token && *token) {
      request.headers.emplace_back("Authorization", std::string("Bearer ") + token);
    }
  }

  std::size_t attempts = 0;
  std::optional<HttpResponse> response;
  while (true) {
    ++attempts;
    count_request();
    response = transport_->post(request);
    if (!transient(response) || attempts > config().retry_limit) break;
    const double wait = config().backoff_seconds * std::pow(2.0, static_cast<double>(attempts - 1));
    if (wait > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(wait));
  }
  if (attempts_out) *attempts_out = attempts;
  if (!response) {
    throw RequestError("record " + record_id + ": no response from " + url + " after " + std::to_string(attempts) +
                           " attempts",
                       record_id, attempts);
  }
  if (response->status < 200 || response->status >= 300) {
    throw RequestError("record " + record_id + ": HTTP " + std::to_string(response->status) + " from " + url +
                           " after " + std::to_string(attempts) + " attempts",
                       record_id, attempts);
  }
  return *response;
}

std::string HttpModelClient::chat(const std::string& prompt, const std::optional<ImagePayload>& image,
                                  const std::string& record_id) {
  nlohmann::json body = {{"model", config().model},
                         {"messages", nlohmann::json::array({user_message(prompt, image)})},
                         {"temperature", 0}};
  std::size_t attempts = 0;
  const HttpResponse response = send_with_retries(config().endpoint, body.dump(), record_id, &attempts);
  const auto parsed = nlohmann::json::parse(response.body, nullptr, false);
  const nlohmann::json::json_pointer ptr(config().text_pointer);
  if (parsed.is_discarded() || !parsed.contains(ptr) || !parsed.at(ptr).is_string()) {
    throw RequestError("record " + record_id + ": malformed response body (no text at " + config().text_pointer + ")",
                       record_id, attempts);
  }
  return parsed.at(ptr).get<std::string>();
}

ImagePayload HttpModelClient::load_image(const GroundingRecord& record) const {
  std::string path = record.image;
  if (!image_root_.empty() && !path.empty() && path.front() != '/') path = image_root_ + "/" + path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("record " + record.id + ": cannot read image " + path);
  ImagePayload payload;
  payload.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  payload.mime = mime_for_path(path);
  return payload;
}

GroundResult HttpModelClient::ground(const GroundingRecord& record) {
  const ImagePayload image = load_image(record);
  const ImageDims model_dims = smart_resize(record.dims, config().resize).dims;
  std::string raw = chat(render_prompt(config().ground_prompt, record.instruction), image, record.id);
  return interpret_ground_output(std::move(raw), record, model_dims);
}

EmbeddingVector HttpModelClient::embed(const GroundingRecord& record) {
  const ImagePayload image = load_image(record);
  nlohmann::json body = {{"model", config().model},
                         {"messages", nlohmann::json::array({user_message(record.instruction, image)})}};
  const std::string& url = config().embeddings_endpoint.empty() ? config().endpoint : config().embeddings_endpoint;
  std::size_t attempts = 0;
  const HttpResponse response = send_with_retries(url, body.dump(), record.id, &attempts);
  const auto parsed = nlohmann::json::parse(response.body, nullptr, false);
  const nlohmann::json::json_pointer ptr(config().embedding_pointer);
  if (parsed.is_discarded() || !parsed.contains(ptr) || !parsed.at(ptr).is_array()) {
    throw RequestError("record " + record.id + ": malformed embedding response", record.id, attempts);
  }
  EmbeddingVector v;
  for (const auto& x : parsed.at(ptr)) {
    if (!x.is_number()) throw RequestError("record " + record.id + ": non-numeric embedding entry", record.id, attempts);
    v.values.push_back(x.get<double>());
  }
  return check_dimension(std::move(v), record.id);
}

Label HttpModelClient::binary_judge(JudgeKind kind, const GroundingRecord& record, const BBox& box) {
  const ImagePayload image = load_image(record);
  const ImageDims model_dims = smart_resize(record.dims, config().resize).dims;
  const BBox scaled = rescale_bbox(box, record.dims, model_dims);
  const BBox shown{std::round(scaled.x1), std::round(scaled.y1), std::round(scaled.x2), std::round(scaled.y2)};
  const std::string& tmpl = kind == JudgeKind::Alignment ? config().alignment_prompt : config().ambiguity_prompt;
  return parse_judgment(chat(render_prompt(tmpl, record.instruction, shown), image, record.id));
}

std::string HttpModelClient::complete(const std::string& prompt, const std::optional<ImagePayload>& image) {
  if (prompt.empty()) throw InputError("complete: empty prompt");
  return chat(prompt, image, "<completion>");
}

}  // namespace curate
