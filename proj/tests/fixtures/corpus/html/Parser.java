package org.example.html;

import org.jsoup.Jsoup;
import org.jsoup.nodes.Document;

// Braces inside strings and comments must not confuse the extractor: { } }}
public class Parser {

    private static final String OPEN = "{";
    private static final char CLOSE = '}';

    /* a block comment with an unbalanced brace {
       spanning two lines */
    public static Document parse(String html) {
        String marker = "}{";
        return Jsoup.parse(html + marker);
    }

    @Override
    public String toString() {
        return "Parser{" + OPEN + CLOSE + "}";
    }

    @SuppressWarnings({"unchecked", "rawtypes"})
    static int depth(String text) {
        int d = 0;
        for (char c : text.toCharArray()) {
            if (c == '{') { d++; }
            else if (c == '}') { d--; }
        }
        return d;
    }

    public String template() {
        return """
            {
              "kind": "parser" }
            """;
    }
}
