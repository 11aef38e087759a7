#include "memedial/mock_backends.hpp"

#include <array>
#include <cstdlib>
#include <vector>

#include "memedial/rng.hpp"
#include "memedial/templates.hpp"

namespace memedial {

Vector mock_embed(std::string_view text, std::size_t dim) {
  const CounterNormalStream stream(fnv1a64(text));
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = stream.draw(i);
  return unit_storage_vector(Vector(std::move(v)));
}

Vector MockEmbeddingBackend::embed(std::string_view text) { return mock_embed(text, dim_); }

Vector MockEmbeddingBackend::embed_image(const Bytes& image) {
  std::string keyed = "image:";
  keyed.append(reinterpret_cast<const char*>(image.data()), image.size());
  return mock_embed(keyed, dim_);
}

namespace mock_phrases {
namespace {
constexpr std::array<std::string_view, 8> kScenarios = {
    "朋友之间闲聊周末计划", "同事在工作群里讨论加班", "同学考试前互相打气",
    "家人关心彼此的身体健康", "网友讨论体育比赛结果", "朋友分享新上映的电影",
    "玩家讨论游戏新版本",   "室友商量晚饭点外卖",
};
constexpr std::array<std::string_view, 6> kInappropriate = {
    "正式的商务谈判",   "向长辈表达哀悼",         "严肃的医疗咨询",
    "公开的道歉声明",   "与陌生人的首次正式沟通", "讨论严重的事故新闻",
};
constexpr std::array<std::string_view, 8> kEmotions = {
    "开心得意，哈哈哈停不下来", "无奈摆烂，躺平算了",   "惊讶震惊，不敢相信",
    "调侃揶揄，阴阳怪气",       "感动暖心，被治愈了",   "尴尬社死，想找地缝",
    "加油打气，冲就完事了",     "委屈巴巴，求抱抱",
};
constexpr std::array<std::string_view, 8> kMotivations = {
    "缓解尴尬的气氛",   "表达认同与支持",   "委婉地拒绝对方",   "调侃对方拉近关系",
    "寻求安慰和关注",   "自然地结束话题",   "表达惊讶并追问",   "鼓励对方坚持下去",
};
constexpr std::array<std::string_view, 10> kOpeners = {
    "真的假的",     "我刚刚也看到了", "说实话有点意外", "你这么一说我想起来了",
    "这事儿挺有意思", "我觉得还行吧",   "不会吧",         "确实是这样",
    "我不太同意哦", "笑死我了",
};
constexpr std::array<std::string_view, 8> kClosers = {
    "你怎么看", "回头细聊", "感觉大家都在讨论", "我得好好想想",
    "下次一起去呗", "太离谱了", "你先说说你的想法", "我站你这边",
};
}  // namespace

std::span<const std::string_view> scenarios() { return kScenarios; }
std::span<const std::string_view> inappropriate() { return kInappropriate; }
std::span<const std::string_view> emotions() { return kEmotions; }
std::span<const std::string_view> motivations() { return kMotivations; }

Combo combo(std::size_t c) {
  c %= kComboCount;
  return {c % 8, (c / 8 + c) % 8, (c * 5 + (c / 8) * 3 + 1) % 8};
}
}  // namespace mock_phrases

namespace {

std::string join_sections(const std::vector<std::string_view>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) {
      out += '\n';
      out += kSectionSentinel;
      out += '\n';
    }
    out += fields[i];
  }
  return out;
}

std::string param_or(const ChatRequest& r, const std::string& key, std::string fallback) {
  const auto it = r.params.find(key);
  return it == r.params.end() ? fallback : it->second;
}

}  // namespace

std::string MockChatBackend::send(const ChatRequest& request) {
  using namespace mock_phrases;
  const std::uint64_t h = splitmix64(request.fingerprint());
  if (request.task == "utterance") {
    return std::string(kOpeners[h % kOpeners.size()]) + "，" +
           std::string(kClosers[(h >> 20) % kClosers.size()]);
  }
  if (request.task == "summary") {
    const Combo c = combo(h % kComboCount);
    return join_sections({kScenarios[c.scenario], kEmotions[c.emotion], kMotivations[c.motivation]});
  }
  if (request.task == "scenarios") {
    const int n = std::atoi(param_or(request, "n", "1").c_str());
    std::vector<std::string> blocks;
    for (int i = 0; i < n; ++i) {
      const std::uint64_t hi = splitmix64(h + static_cast<std::uint64_t>(i));
      blocks.push_back(std::string("两人相识多年，") + std::string(kScenarios[(hi + i) % 8]) +
                       "\n" + "第" + std::to_string(i + 1) + "件事让两人都觉得" +
                       std::string(kEmotions[(hi >> 16) % 8]));
    }
    std::vector<std::string_view> views(blocks.begin(), blocks.end());
    return join_sections(views);
  }
  return "好的";
}

std::string MockVisionBackend::send(const ChatRequest& request) {
  using namespace mock_phrases;
  if (request.task == "annotation") {
    // Depends on the image bytes only, so annotation is stable under prompt edits.
    std::uint64_t h = 0;
    for (const auto& m : request.messages) {
      for (const auto& p : m.parts) {
        if (p.is_image()) h = splitmix64(h ^ fnv1a64(std::span<const std::byte>(p.image->data)));
      }
    }
    const Combo c = combo(h % kComboCount);
    return join_sections({kScenarios[c.scenario], kInappropriate[(h >> 32) % 6],
                          kEmotions[c.emotion], kMotivations[c.motivation]});
  }
  if (request.task == "judge") {
    std::uint64_t h = splitmix64(request.fingerprint());
    std::string out;
    for (int i = 0; i < 5; ++i) {
      if (i) out += ' ';
      out += std::to_string(60 + (h % 36));
      h = splitmix64(h);
    }
    return out;
  }
  return "一张表情包";
}

}  // namespace memedial
