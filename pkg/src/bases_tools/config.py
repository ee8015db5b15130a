from pathlib import Path

from pydantic import BaseModel
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)

# bumped whenever the JSON complex schema changes
FORMAT_VERSION = 1


class CacheSettings(BaseModel):
    directory: Path = Path(".cache/bases-tools")


class HomologySettings(BaseModel):
    # modular ranks are only ever a pre-screen, the rational rank is authoritative
    prescreen: bool = False
    prescreen_primes: list[int] = [32003, 65521]


class BasesSettings(BaseModel):
    # step budget = budget_factor * (domain vertices) * L
    budget_factor: int = 10
    # worker processes for skeleton construction (1 = in-process)
    workers: int = 1
    cycle_attempts: int = 1000


class GroupSettings(BaseModel):
    max_order: int = 1_000_000
    # candidate matrices searched exhaustively; simplices x elements beyond it sample the rotation check
    exhaustive_limit: int = 2_000_000
    sample_size: int = 20_000
    # largest level kernel turned into vertex permutations for the rotation check
    action_limit: int = 10_000


class HeisenbergSettings(BaseModel):
    max_generator_level: int = 2


class VerifySettings(BaseModel):
    form_trials: int = 10_000
    snf_trials: int = 1_000
    reduction_trials: int = 10_000
    commutator_trials: int = 10_000
    fill_cycles: int = 100
    max_cycle_length: int = 8
    pair_sample: int = 10_000


class Settings(BaseSettings):
    """Toolkit settings, loaded from init arguments, BASES_* environment variables and config.yml."""

    model_config = SettingsConfigDict(
        yaml_file="config.yml",
        yaml_file_encoding="utf-8",
        env_prefix="BASES_",
        env_nested_delimiter="__",
    )

    cache: CacheSettings = CacheSettings()
    homology: HomologySettings = HomologySettings()
    bases: BasesSettings = BasesSettings()
    group: GroupSettings = GroupSettings()
    heisenberg: HeisenbergSettings = HeisenbergSettings()
    verify: VerifySettings = VerifySettings()

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings, env_settings, YamlConfigSettingsSource(settings_cls))


# singleton instance
settings = Settings()
