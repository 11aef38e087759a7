#!/usr/bin/env python3
"""Regenerates data/images/*.png and the unembedded data/sample_library.jsonl.

Annotation texts reuse the mock phrase banks so that offline runs produce
exact summary/meme matches. Run `memedial embed --mock` afterwards.
"""
import json
import sys
from pathlib import Path

from PIL import Image, ImageDraw

SCENARIOS = ["朋友之间闲聊周末计划", "同事在工作群里讨论加班", "同学考试前互相打气",
             "家人关心彼此的身体健康", "网友讨论体育比赛结果", "朋友分享新上映的电影",
             "玩家讨论游戏新版本", "室友商量晚饭点外卖"]
INAPPROPRIATE = ["正式的商务谈判", "向长辈表达哀悼", "严肃的医疗咨询", "公开的道歉声明",
                 "与陌生人的首次正式沟通", "讨论严重的事故新闻"]
EMOTIONS = ["开心得意，哈哈哈停不下来", "无奈摆烂，躺平算了", "惊讶震惊，不敢相信",
            "调侃揶揄，阴阳怪气", "感动暖心，被治愈了", "尴尬社死，想找地缝",
            "加油打气，冲就完事了", "委屈巴巴，求抱抱"]
MOTIVATIONS = ["缓解尴尬的气氛", "表达认同与支持", "委婉地拒绝对方", "调侃对方拉近关系",
               "寻求安慰和关注", "自然地结束话题", "表达惊讶并追问", "鼓励对方坚持下去"]


def combo(c):
    c %= 64
    return c % 8, (c // 8 + c) % 8, (c * 5 + (c // 8) * 3 + 1) % 8


def main(root: Path, count: int = 24) -> None:
    images = root / "images"
    images.mkdir(parents=True, exist_ok=True)
    lines = []
    for c in range(count):
        s, e, m = combo(c)
        name = f"meme_{c:02d}.png"
        img = Image.new("RGB", (32, 32), ((c * 37) % 256, (c * 91) % 256, (c * 53) % 256))
        ImageDraw.Draw(img).ellipse((6, 6, 26, 26), fill=(255 - c * 7, 220, 40 + c * 5))
        img.save(images / name, format="PNG", optimize=False)
        lines.append(json.dumps({
            "id": f"meme_{c:02d}",
            "image_path": name,
            "s_plus": SCENARIOS[s],
            "s_minus": INAPPROPRIATE[c % 6],
            "emotion": EMOTIONS[e],
            "motivation": MOTIVATIONS[m],
        }, ensure_ascii=False))
    (root / "sample_library.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data")
