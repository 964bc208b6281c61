#include <cstdio>
#include <cstring>

char current_profile[1024];

static const char* kProfiles[] = {"default", "staging", "review", "release"};

bool profile_known()
{
    char name[128];
    size_t i;

    strncpy(name, current_profile, sizeof(name) - 1);
    name[sizeof(name) - 1] = '\0';
    for (i = 0; name[i]; i++) {
        if (name[i] >= 'A' && name[i] <= 'Z') {
            name[i] = (char)(name[i] - 'A' + 'a');
        }
    }

    for (i = 0; i < sizeof(kProfiles) / sizeof(kProfiles[0]); i++) {
        if (strstr(name, kProfiles[i]) != 0) {
            return true;
        }
    }

    return false;
}

int main()
{
    snprintf(current_profile, sizeof(current_profile), "%s", "Release");
    return profile_known() ? 0 : 1;
}
