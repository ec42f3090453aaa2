from __future__ import annotations

from dataclasses import asdict, dataclass, field

from app.domain.exceptions import WrongArgumentsForCommand


@dataclass
class Message:
    signature: str = field(init=False)

    def __post_init__(self):
        self.signature = self.__class__.__name__

    def __hash__(self):
        return hash(self.signature)

    def __eq__(self, others):
        if not isinstance(others, Message):
            return False
        return self.signature == others.signature

    def dict(self):
        return asdict(self)


command_registry: dict[str, type[Message]] = {}


def register_command(class_):
    command_registry[class_.__name__] = class_
    return class_


def command_generator(command_type, **kwargs) -> Message:
    if command_type not in command_registry:
        raise ValueError("Such Command Is Not Defined")
    try:
        command = command_registry[command_type](**kwargs)
    except (TypeError, ValueError) as e:
        raise WrongArgumentsForCommand(f"Wrong Values Are Given For {command_type}: {e}")
    else:
        return command
