/* Minimal C client: smallest strongest attack on a three-node chain. */
#include <stdio.h>
#include "qkdnet.h"

static const char *DOC =
    "[graph]\n"
    "nodes = [\"a\", \"b\", \"c\"]\n"
    "alice = \"a\"\n"
    "bob = \"b\"\n"
    "edges = [{ id = \"e1\", u = \"a\", v = \"c\" }, { id = \"e2\", u = \"c\", v = \"b\" }]\n"
    "[security]\n";

int main(void) {
    QkdNetwork *net = NULL;
    if (qkd_network_from_toml(DOC, &net) != QKD_STATUS_OK) {
        fprintf(stderr, "%s\n", qkd_last_error());
        return 1;
    }
    size_t size = 0;
    char *labels = NULL;
    QkdStatus st = qkd_min_attack(net, &size, &labels);
    if (st == QKD_STATUS_OK) {
        printf("minimum attack: %zu node(s) %s\n", size, labels);
        qkd_string_free(labels);
    }
    qkd_network_free(net);
    return st == QKD_STATUS_OK ? 0 : 1;
}
