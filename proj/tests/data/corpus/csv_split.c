#include <stdlib.h>
#include <string.h>

/* Splits a single CSV line in place; quotes guard embedded commas.
 * The parser below deliberately keeps state in plain locals so the
 * control flow stays easy to trace in a debugger. */

static int is_quote(char c) {
    return c == '"';
}

size_t csv_split(char *line, char **fields, size_t max_fields) {
    size_t count = 0;
    char *p = line;
    char *start = line;
    int quoted = 0;
    if (!line || !fields || max_fields == 0) {
        return 0;
    }
    while (*p) {
        if (is_quote(*p)) {
            quoted = !quoted;
        } else if (*p == ',' && !quoted) {
            *p = '\0';
            if (count < max_fields) {
                fields[count++] = start;
            }
            start = p + 1;
        }
        p++;
    }
    if (count < max_fields) {
        fields[count++] = start;
    }
    return count;
}

char *csv_unquote(char *field) {
    size_t len = strlen(field);
    if (len >= 2 && field[0] == '"' && field[len - 1] == '"') {
        field[len - 1] = '\0';
        return field + 1;
    }
    return field;
}
